#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gave/oracle.hpp"

namespace gave::oracle {

namespace {

// Plain loop convolution; `pad_delta` only exists for the mutant.
Tensor conv_impl(const Tensor& input, const ConvParams& p, long pad_delta) {
    const long H = static_cast<long>(input.dim(0)), W = static_cast<long>(input.dim(1));
    const long C = static_cast<long>(input.dim(2));
    const long O = static_cast<long>(p.kernel.dim(0)), K = static_cast<long>(p.kernel.dim(2));
    if (static_cast<long>(p.kernel.dim(1)) != C) throw std::invalid_argument("oracle conv: channel mismatch");
    const long S = p.stride, d = p.dilation;
    const long pad = (K - 1) * d / 2 + pad_delta;
    const long Ho = (H + S - 1) / S, Wo = (W + S - 1) / S;
    Tensor out({static_cast<std::size_t>(Ho), static_cast<std::size_t>(Wo), static_cast<std::size_t>(O)});
    for (long y = 0; y < Ho; ++y)
        for (long x = 0; x < Wo; ++x)
            for (long o = 0; o < O; ++o) {
                double acc = p.bias[static_cast<std::size_t>(o)];
                for (long i = 0; i < C; ++i)
                    for (long u = 0; u < K; ++u)
                        for (long v = 0; v < K; ++v) {
                            const long iy = y * S + u * d - pad, ix = x * S + v * d - pad;
                            if (iy < 0 || ix < 0 || iy >= H || ix >= W) continue;
                            const double k = p.kernel[static_cast<std::size_t>(((o * C + i) * K + u) * K + v)];
                            acc += k * input[static_cast<std::size_t>((iy * W + ix) * C + i)];
                        }
                out[static_cast<std::size_t>((y * Wo + x) * O + o)] = static_cast<float>(acc);
            }
    return out;
}

std::vector<double> trilinear_impl(const BilateralGrid& grid, const GuidanceMap& guidance, std::size_t y,
                                   std::size_t x, double half) {
    const Shape& s = grid.values.shape();
    const long gh = static_cast<long>(s[0]), gw = static_cast<long>(s[1]);
    const std::size_t C = s[2];
    const long n = static_cast<long>(s[3]);
    const double g = guidance.values[y * guidance.values.dim(1) + x];
    const double cy = (static_cast<double>(y) + half) / 8.0 - half;
    const double cx = (static_cast<double>(x) + half) / 8.0 - half;
    const double cz = g * static_cast<double>(n) - half;

    std::vector<double> out(C, 0.0);
    const double fy0 = std::floor(cy), fx0 = std::floor(cx), fz0 = std::floor(cz);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int e = 0; e < 2; ++e) {
                const double wy = a ? cy - fy0 : 1.0 - (cy - fy0);
                const double wx = b ? cx - fx0 : 1.0 - (cx - fx0);
                const double wz = e ? cz - fz0 : 1.0 - (cz - fz0);
                const long iy = std::min(std::max(static_cast<long>(fy0) + a, 0L), gh - 1);
                const long ix = std::min(std::max(static_cast<long>(fx0) + b, 0L), gw - 1);
                const long iz = std::min(std::max(static_cast<long>(fz0) + e, 0L), n - 1);
                for (std::size_t c = 0; c < C; ++c) {
                    const std::size_t off =
                        ((static_cast<std::size_t>(iy * gw + ix) * C + c) * static_cast<std::size_t>(n)) +
                        static_cast<std::size_t>(iz);
                    out[c] += wy * wx * wz * grid.values[off];
                }
            }
    return out;
}

std::vector<double> block_impl(std::span<const float> coeffs, std::span<const float> visual, std::size_t n_group,
                               bool transpose) {
    const std::size_t D = visual.size();
    if (n_group == 0 || D % n_group != 0) throw std::invalid_argument("oracle block matmul: bad group count");
    const std::size_t m = D / n_group;
    if (coeffs.size() != D * m) throw std::invalid_argument("oracle block matmul: coefficient length");
    std::vector<double> out(D, 0.0);
    for (std::size_t g = 0; g < n_group; ++g) {
        const float* A = coeffs.data() + g * m * m;
        for (std::size_t r = 0; r < m; ++r) {
            double acc = 0;
            for (std::size_t c = 0; c < m; ++c)
                acc += static_cast<double>(transpose ? A[c * m + r] : A[r * m + c]) * visual[g * m + c];
            out[g * m + r] = acc;
        }
    }
    return out;
}

double directed(std::span<const Vec3> from, std::span<const Vec3> to) {
    double sum = 0;
    for (const Vec3& p : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& q : to) {
            const double dx = p.x() - q.x(), dy = p.y() - q.y(), dz = p.z() - q.z();
            best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
        sum += std::sqrt(best);
    }
    return sum / static_cast<double>(from.size());
}

}  // namespace

Tensor conv(const Tensor& input, const ConvParams& p) { return conv_impl(input, p, 0); }

std::vector<double> trilinear(const BilateralGrid& grid, const GuidanceMap& guidance, std::size_t y, std::size_t x) {
    return trilinear_impl(grid, guidance, y, x, 0.5);
}

std::vector<double> block_matmul(std::span<const float> coeffs, std::span<const float> visual, std::size_t n_group) {
    return block_impl(coeffs, visual, n_group, false);
}

double chamfer(std::span<const Vec3> a, std::span<const Vec3> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("oracle chamfer: empty cloud");
    return 0.5 * (directed(a, b) + directed(b, a)) * 100.0;
}

CorrespondenceSet match(const PointCloud& ref, const PointCloud& tgt, std::size_t k) {
    const std::size_t D = ref.feature_dim;
    CorrespondenceSet all;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
        std::size_t j1 = 0;
        for (std::size_t j = 0; j < tgt.size(); ++j) {
            double dot = 0;
            for (std::size_t c = 0; c < D; ++c)
                dot += static_cast<double>(ref.features[i * D + c]) * tgt.features[j * D + c];
            const double d = 1.0 - dot;
            if (d < d1) {
                d2 = d1;
                d1 = d;
                j1 = j;
            } else if (d < d2) {
                d2 = d;
            }
        }
        d1 = std::max(d1, 0.0);
        d2 = std::max(d2, 0.0);
        all.push_back({i, j1, d2 > 0 ? std::clamp(1.0 - d1 / d2, 0.0, 1.0) : 0.0});
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const Correspondence& a, const Correspondence& b) { return a.weight > b.weight; });
    if (all.size() > k) all.resize(k);
    return all;
}

Eigen::MatrixXd central_difference(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double step) {
    Eigen::MatrixXd J;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        Eigen::VectorXd hi = x, lo = x;
        hi[j] += step;
        lo[j] -= step;
        const Eigen::VectorXd col = (f(hi) - f(lo)) / (2.0 * step);
        if (J.size() == 0) J.resize(col.size(), x.size());
        J.col(j) = col;
    }
    return J;
}

double masked_mean_abs(std::span<const float> a, std::span<const float> b, std::span<const std::uint8_t> mask,
                       std::size_t channels) {
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        for (std::size_t c = 0; c < channels; ++c) {
            sum += std::abs(static_cast<double>(a[i * channels + c]) - static_cast<double>(b[i * channels + c]));
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("oracle masked mean: nothing selected");
    return sum / static_cast<double>(count);
}

namespace mutant {

Tensor conv_shifted_padding(const Tensor& input, const ConvParams& p) { return conv_impl(input, p, 1); }

std::vector<double> trilinear_no_half_cell(const BilateralGrid& grid, const GuidanceMap& guidance, std::size_t y,
                                           std::size_t x) {
    return trilinear_impl(grid, guidance, y, x, 0.0);
}

std::vector<double> block_matmul_transposed(std::span<const float> coeffs, std::span<const float> visual,
                                            std::size_t n_group) {
    return block_impl(coeffs, visual, n_group, true);
}

double chamfer_one_sided(std::span<const Vec3> a, std::span<const Vec3> b) { return directed(a, b) * 100.0; }

}  // namespace mutant

}  // namespace gave::oracle
