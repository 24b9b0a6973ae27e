#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <random>

#include "gave/alignment.hpp"
#include "gave/depth_preproc.hpp"
#include "gave/error.hpp"
#include "gave/llt.hpp"
#include "gave/metrics.hpp"
#include "gave/oracle.hpp"
#include "gave/render_loss.hpp"
#include "gave/synth.hpp"

namespace gave::oracle {

double relative_difference(double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / scale;
}

Mat3 random_rotation(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    if (q.norm() < 1e-12) q = Eigen::Quaterniond::Identity();
    return q.normalized().toRotationMatrix();
}

GradcheckResult gradcheck(std::uint64_t seed, std::size_t trials, std::size_t points) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GradcheckResult result;
    const auto n = static_cast<Eigen::Index>(points);

    for (std::size_t trial = 0; trial < trials;) {
        std::vector<Vec3> x(points), y(points);
        std::vector<double> w(points);
        const Mat3 R = random_rotation(rng());
        const Vec3 t(u(rng), u(rng), u(rng));
        for (std::size_t i = 0; i < points; ++i) {
            x[i] = Vec3(u(rng), u(rng), u(rng));
            y[i] = R * x[i] + t + 0.05 * Vec3(u(rng), u(rng), u(rng));
            w[i] = 1.0 + 0.5 * u(rng);
        }
        ProcrustesGradient g;
        try {
            g = procrustes_grad(x, y, w);
        } catch (const Error&) {
            continue;  // draw another instance; repeated singular values are not well conditioned
        }

        Eigen::VectorXd packed(7 * n);
        for (Eigen::Index i = 0; i < n; ++i) {
            packed.segment<3>(3 * i) = x[static_cast<std::size_t>(i)];
            packed.segment<3>(3 * n + 3 * i) = y[static_cast<std::size_t>(i)];
            packed[6 * n + i] = w[static_cast<std::size_t>(i)];
        }
        auto solve = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
            std::vector<Vec3> xs(points), ys(points);
            std::vector<double> ws(points);
            for (Eigen::Index i = 0; i < n; ++i) {
                xs[static_cast<std::size_t>(i)] = v.segment<3>(3 * i);
                ys[static_cast<std::size_t>(i)] = v.segment<3>(3 * n + 3 * i);
                ws[static_cast<std::size_t>(i)] = v[6 * n + i];
            }
            return pose_vector(weighted_procrustes(xs, ys, ws));
        };
        const Eigen::MatrixXd numeric = central_difference(solve, packed, 1e-5);
        Eigen::MatrixXd analytic(12, 7 * n);
        analytic << g.d_x, g.d_y, g.d_w;
        for (Eigen::Index r = 0; r < analytic.rows(); ++r)
            for (Eigen::Index c = 0; c < analytic.cols(); ++c)
                result.max_relative_error =
                    std::max(result.max_relative_error, relative_difference(analytic(r, c), numeric(r, c)));
        result.entries += static_cast<std::size_t>(analytic.size());
        ++trial;
        ++result.trials;
    }
    return result;
}

namespace {

double max_relative(std::span<const float> fast, std::span<const float> reference) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < fast.size(); ++i) {
        num = std::max(num, std::abs(static_cast<double>(fast[i]) - reference[i]));
        den = std::max(den, std::abs(static_cast<double>(reference[i])));
    }
    return num / std::max(den, 1e-30);
}

Tensor random_tensor(const Shape& shape, std::mt19937_64& rng) {
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    Tensor t(shape);
    for (auto& v : t.values()) v = u(rng);
    return t;
}

ConvParams random_conv(std::size_t out, std::size_t in, std::size_t k, int stride, int dilation,
                       std::mt19937_64& rng) {
    ConvParams p;
    p.kernel = random_tensor({out, in, k, k}, rng);
    p.bias = random_tensor({out}, rng);
    p.stride = stride;
    p.dilation = dilation;
    return p;
}

struct Suite {
    std::ostream& out;
    SelftestResult result;

    template <class F>
    void check(const std::string& name, F&& body) {
        bool ok = false;
        std::string note;
        try {
            ok = body();
        } catch (const std::exception& e) {
            note = std::string(" (") + e.what() + ")";
        }
        out << (ok ? "PASS " : "FAIL ") << name << note << '\n';
        ++(ok ? result.passed : result.failed);
    }
};

}  // namespace

SelftestResult run_selftest(std::ostream& out, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Suite s{out, {}};

    // Convolution.
    for (int stride : {1, 2})
        for (int dilation : {1, 2}) {
            const Tensor in = random_tensor({9, 7, 2}, rng);
            const ConvParams p = random_conv(3, 2, 3, stride, dilation, rng);
            s.check("conv2d matches loop oracle (stride " + std::to_string(stride) + ", dilation " +
                        std::to_string(dilation) + ")",
                    [&] { return max_relative(conv2d(in, p).values(), oracle::conv(in, p).values()) < 1e-5; });
        }
    {
        const Tensor in = random_tensor({7, 7, 2}, rng);
        const ConvParams p = random_conv(2, 2, 3, 1, 1, rng);
        s.check("planted bug: shifted padding is detected",
                [&] { return max_relative(mutant::conv_shifted_padding(in, p).values(), conv2d(in, p).values()) > 1e-3; });
    }
    s.check("sigmoid(0) is 0.5", [] { return sigmoid(0.0f) == 0.5f; });

    // Slicing and the local linear transform.
    {
        const Tensor raw = random_tensor({3, 4, 12}, rng);
        const BilateralGrid grid = BilateralGrid::from_features(raw, 3);
        Tensor g({24, 32, 1});
        std::uniform_real_distribution<float> unit(0.001f, 0.999f);
        for (auto& v : g.values()) v = unit(rng);
        const GuidanceMap guide{g};
        const Tensor sliced = slice(grid, guide);
        s.check("slice matches trilinear oracle", [&] {
            double worst = 0;
            for (std::size_t y = 0; y < 24; ++y)
                for (std::size_t x = 0; x < 32; ++x) {
                    const auto ref = oracle::trilinear(grid, guide, y, x);
                    std::vector<float> refs(ref.begin(), ref.end());
                    worst = std::max(worst, max_relative({sliced.data() + (y * 32 + x) * 4, 4}, refs));
                }
            return worst < 1e-5;
        });
        s.check("planted bug: missing half-cell offset is detected", [&] {
            double worst = 0;
            for (std::size_t y = 0; y < 24; ++y)
                for (std::size_t x = 0; x < 32; ++x) {
                    const auto bad = mutant::trilinear_no_half_cell(grid, guide, y, x);
                    std::vector<float> bads(bad.begin(), bad.end());
                    worst = std::max(worst, max_relative({sliced.data() + (y * 32 + x) * 4, 4}, bads));
                }
            return worst > 1e-3;
        });
    }
    {
        const std::size_t groups = 4, m = 4, D = groups * m;
        const Tensor flat = random_tensor({2, 3, D * m}, rng);
        const FeatureMap v{random_tensor({2, 3, D}, rng), 1};
        const FeatureMap f = apply_llt(SlicedCoefficients::from_flat(flat, groups), v);
        s.check("apply_llt matches block matmul oracle", [&] {
            double worst = 0;
            for (std::size_t p = 0; p < 6; ++p) {
                const auto ref = block_matmul({flat.data() + p * D * m, D * m}, {v.values.data() + p * D, D}, groups);
                std::vector<float> refs(ref.begin(), ref.end());
                worst = std::max(worst, max_relative({f.values.data() + p * D, D}, refs));
            }
            return worst < 1e-5;
        });
        s.check("planted bug: transposed group matrices are detected", [&] {
            const auto bad = mutant::block_matmul_transposed({flat.data(), D * m}, {v.values.data(), D}, groups);
            std::vector<float> bads(bad.begin(), bad.end());
            return max_relative({f.values.data(), D}, bads) > 1e-3;
        });
    }

    // Chamfer distance.
    {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<Vec3> a(200), b(150);
        for (auto& p : a) p = Vec3(u(rng), u(rng), u(rng));
        for (auto& p : b) p = Vec3(u(rng), u(rng), 0.5 * u(rng));
        s.check("chamfer_distance equals exhaustive oracle", [&] { return chamfer_distance(a, b) == chamfer(a, b); });
        s.check("planted bug: one-sided chamfer is detected",
                [&] { return std::abs(mutant::chamfer_one_sided(a, b) - chamfer_distance(a, b)) > 1e-6; });
        const std::vector<Vec3> two_a{{0, 0, 0}, {1, 0, 0}}, two_b{{0, 0, 0.01}, {1, 0, 0.03}};
        s.check("oracle chamfer on two points is 2 cm", [&] { return std::abs(chamfer(two_a, two_b) - 2.0) < 1e-12; });
    }

    // Matching.
    {
        PointCloud ref, tgt;
        ref.feature_dim = tgt.feature_dim = 8;
        std::normal_distribution<double> n(0.0, 1.0);
        for (int i = 0; i < 10; ++i) {
            Eigen::VectorXd f(8);
            for (auto& v : f) v = n(rng);
            f.normalize();
            Eigen::VectorXd g = f;
            for (auto& v : g) v += 0.05 * n(rng);
            g.normalize();
            ref.positions.emplace_back(i, 0, 0);
            tgt.positions.emplace_back(i, 0, 0);
            for (int c = 0; c < 8; ++c) ref.features.push_back(static_cast<float>(f[c]));
            for (int c = 0; c < 8; ++c) tgt.features.push_back(static_cast<float>(g[c]));
        }
        s.check("match_topk equals exhaustive matcher", [&] {
            const auto fast = match_topk(ref, tgt, 10);
            const auto slow = match(ref, tgt, 10);
            if (fast.size() != slow.size()) return false;
            for (std::size_t i = 0; i < fast.size(); ++i)
                if (fast[i].ref_index != slow[i].ref_index || fast[i].tgt_index != slow[i].tgt_index ||
                    std::abs(fast[i].weight - slow[i].weight) > 1e-4)
                    return false;
            return true;
        });
    }

    // Alignment.
    s.check("weighted_procrustes recovers a planted pose", [&] {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const Mat3 R = random_rotation(rng());
        const Vec3 t(u(rng), u(rng), u(rng));
        std::vector<Vec3> x(30), y(30);
        std::vector<double> w(30, 1.0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = Vec3(u(rng), u(rng), u(rng));
            y[i] = R * x[i] + t;
        }
        const Pose p = weighted_procrustes(x, y, w);
        return rotation_error(p.rotation, R) < 1e-6 && (p.translation - t).norm() < 1e-6;
    });
    s.check("procrustes_grad matches central differences", [&] {
        return gradcheck(rng(), 5).max_relative_error < 1e-4;
    });

    // Preprocessing, rendering and scenes.
    {
        SceneParams params;
        params.width = 32;
        params.height = 24;
        params.focal = 28;
        const ScenePair a = gen_scene(seed, params), b = gen_scene(seed, params);
        s.check("gen_scene is deterministic", [&] {
            return a.ref.depth == b.ref.depth && a.ref.rgb == b.ref.rgb && a.tgt.depth == b.tgt.depth &&
                   a.gt.matrix() == b.gt.matrix();
        });
        s.check("render of unproject reproduces the frame", [&] {
            const RenderedView v = render_points(unproject(a.ref), Pose::identity(), a.ref.intrinsics);
            for (std::size_t i = 0; i < a.ref.pixel_count(); ++i) {
                if (!a.ref.valid[i]) continue;
                if (!v.mask[i] || v.depth[i] != a.ref.depth[i]) return false;
                for (int c = 0; c < 3; ++c)
                    if (v.rgb[3 * i + c] != a.ref.rgb[3 * i + c]) return false;
            }
            return true;
        });
        s.check("photometric loss matches masked-mean oracle", [&] {
            const RenderedView v = render_points(unproject(a.ref), a.gt, a.tgt.intrinsics);
            std::vector<std::uint8_t> both(v.mask.size());
            for (std::size_t i = 0; i < both.size(); ++i) both[i] = v.mask[i] && a.tgt.valid[i];
            return std::abs(photometric_loss(v, a.tgt).value - masked_mean_abs(v.rgb, a.tgt.rgb, both, 3)) < 1e-6;
        });
        s.check("hole in a constant neighborhood is filled exactly", [&] {
            RgbdFrame f = RgbdFrame::blank(params.intrinsics());
            std::fill(f.depth.begin(), f.depth.end(), 1.25f);
            std::fill(f.rgb.begin(), f.rgb.end(), 0.4f);
            f.depth_at(10, 10) = 0;
            f.refresh_mask();
            const RgbdFrame filled = fill_holes_jbf(f, JbfParams{});
            return filled.depth_at(10, 10) == 1.25f && filled.valid_count() == filled.pixel_count();
        });
        s.check("normalized depth stays inside [0, 1)", [] {
            for (float d : {0.0f, 1e-30f, 3.0f, 1e6f, 3.4e38f})
                if (const float v = normalize_depth_value(d); !(v >= 0.0f && v < 1.0f)) return false;
            return true;
        });
    }
    return s.result;
}

}  // namespace gave::oracle
