#include "gave/alignment.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

#include "gave/error.hpp"

namespace gave {

namespace {

struct Centered {
    Vec3 x_mean = Vec3::Zero();
    Vec3 y_mean = Vec3::Zero();
    double weight_sum = 0;
    Mat3 cov = Mat3::Zero();  // sum_i w_i (y_i - y_mean)(x_i - x_mean)^T
};

Centered center(std::span<const Vec3> x, std::span<const Vec3> y, std::span<const double> w) {
    if (x.size() != y.size() || x.size() != w.size())
        throw Error(ErrorKind::ShapeMismatch, "procrustes inputs differ in length");
    if (x.size() < 3) throw Error(ErrorKind::Degenerate, "procrustes needs at least 3 points");
    Centered c;
    std::size_t support = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(w[i] >= 0) || !std::isfinite(w[i])) throw Error(ErrorKind::InvalidArgument, "weights must be finite and >= 0");
        if (w[i] == 0) continue;
        ++support;
        c.weight_sum += w[i];
        c.x_mean += w[i] * x[i];
        c.y_mean += w[i] * y[i];
    }
    if (support < 3 || !(c.weight_sum > 0))
        throw Error(ErrorKind::Degenerate, "fewer than 3 points carry positive weight");
    c.x_mean /= c.weight_sum;
    c.y_mean /= c.weight_sum;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (w[i] == 0) continue;
        c.cov += w[i] * (y[i] - c.y_mean) * (x[i] - c.x_mean).transpose();
    }
    return c;
}

struct Decomposition {
    Mat3 u, v;
    Vec3 sigma;  // descending
    double reflect;  // det(U V^T), +-1
    Mat3 rotation;
};

Decomposition decompose(const Mat3& cov) {
    Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Decomposition d{svd.matrixU(), svd.matrixV(), svd.singularValues(), 1.0, Mat3::Identity()};
    if (!(d.sigma[0] > 0) || d.sigma[1] <= 1e-10 * d.sigma[0])
        throw Error(ErrorKind::Degenerate, "cross-covariance has rank < 2 (collinear or coincident points)");
    d.reflect = (d.u * d.v.transpose()).determinant() < 0 ? -1.0 : 1.0;
    d.rotation = d.u * Vec3(1.0, 1.0, d.reflect).asDiagonal() * d.v.transpose();
    return d;
}

}  // namespace

Pose weighted_procrustes(std::span<const Vec3> x, std::span<const Vec3> y, std::span<const double> w) {
    const Centered c = center(x, y, w);
    const Decomposition d = decompose(c.cov);
    return {d.rotation, c.y_mean - d.rotation * c.x_mean};
}

Eigen::Matrix<double, 12, 1> pose_vector(const Pose& pose) {
    Eigen::Matrix<double, 12, 1> v;
    for (int r = 0; r < 3; ++r)
        for (int col = 0; col < 3; ++col) v[3 * r + col] = pose.rotation(r, col);
    v.tail<3>() = pose.translation;
    return v;
}

ProcrustesGradient procrustes_grad(std::span<const Vec3> x, std::span<const Vec3> y, std::span<const double> w) {
    const Centered c = center(x, y, w);
    const Decomposition d = decompose(c.cov);
    const Vec3& s = d.sigma;
    const double tol = 1e-8 * s[0];
    if (s[0] - s[1] <= tol || s[1] - s[2] <= tol)
        throw Error(ErrorKind::Degenerate, "repeated singular values; the alignment derivative is undefined");

    // With H = R P and P = V diag(signed sigma) V^T, a perturbation dH moves
    // R by dR = U D Omega V^T, where Omega is skew and solves
    // Omega_ij (sigma_i + sigma_j) = (D G - G^T D)_ij for G = U^T dH V.
    const Vec3 signed_sigma(s[0], s[1], d.reflect * s[2]);
    const Mat3 dmat = Vec3(1.0, 1.0, d.reflect).asDiagonal();
    const Mat3& R = d.rotation;
    auto rotation_delta = [&](const Mat3& dh) -> Mat3 {
        const Mat3 g = d.u.transpose() * dh * d.v;
        const Mat3 a = dmat * g - g.transpose() * dmat;
        Mat3 omega = Mat3::Zero();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (i != j) omega(i, j) = a(i, j) / (signed_sigma[i] + signed_sigma[j]);
        return d.u * dmat * omega * d.v.transpose();
    };
    auto column = [&](const Mat3& dh, const Vec3& dx_mean, const Vec3& dy_mean) {
        const Mat3 dr = rotation_delta(dh);
        Eigen::Matrix<double, 12, 1> col;
        for (int r = 0; r < 3; ++r)
            for (int k = 0; k < 3; ++k) col[3 * r + k] = dr(r, k);
        col.tail<3>() = dy_mean - dr * c.x_mean - R * dx_mean;
        return col;
    };

    const std::size_t n = x.size();
    ProcrustesGradient out;
    out.pose = {R, c.y_mean - R * c.x_mean};
    out.d_x.setZero(12, static_cast<Eigen::Index>(3 * n));
    out.d_y.setZero(12, static_cast<Eigen::Index>(3 * n));
    out.d_w.setZero(12, static_cast<Eigen::Index>(n));
    const double inv_w = 1.0 / c.weight_sum;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 xc = x[i] - c.x_mean, yc = y[i] - c.y_mean;
        for (int a = 0; a < 3; ++a) {
            const Vec3 e = Vec3::Unit(a);
            const auto col = static_cast<Eigen::Index>(3 * i + a);
            out.d_x.col(col) = column(w[i] * yc * e.transpose(), w[i] * inv_w * e, Vec3::Zero());
            out.d_y.col(col) = column(w[i] * e * xc.transpose(), Vec3::Zero(), w[i] * inv_w * e);
        }
        out.d_w.col(static_cast<Eigen::Index>(i)) = column(yc * xc.transpose(), inv_w * xc, inv_w * yc);
    }
    return out;
}

namespace {

// Weight-proportional draw without replacement; falls back to a uniform
// draw once the remaining weight is exhausted.
std::vector<std::size_t> draw_subset(const std::vector<double>& weights, std::size_t count, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::size_t> picked;
    std::vector<std::uint8_t> taken(weights.size(), 0);
    for (std::size_t k = 0; k < count; ++k) {
        double total = 0;
        for (std::size_t i = 0; i < weights.size(); ++i)
            if (!taken[i]) total += weights[i];
        std::size_t choice = weights.size();
        if (total > 0) {
            double u = unit(rng) * total;
            for (std::size_t i = 0; i < weights.size(); ++i) {
                if (taken[i] || weights[i] <= 0) continue;
                choice = i;
                u -= weights[i];
                if (u < 0) break;
            }
        } else {
            std::size_t remaining = weights.size() - picked.size();
            auto nth = static_cast<std::size_t>(unit(rng) * static_cast<double>(remaining));
            nth = std::min(nth, remaining - 1);
            for (std::size_t i = 0; i < weights.size(); ++i) {
                if (taken[i]) continue;
                if (nth-- == 0) {
                    choice = i;
                    break;
                }
            }
        }
        taken[choice] = 1;
        picked.push_back(choice);
    }
    return picked;
}

}  // namespace

Pose align_randomized(const CorrespondenceSet& c, const PointCloud& ref, const PointCloud& tgt,
                      const AlignParams& params) {
    AlignReport report;
    return align_randomized(c, ref, tgt, params, report);
}

Pose align_randomized(const CorrespondenceSet& c, const PointCloud& ref, const PointCloud& tgt,
                      const AlignParams& params, AlignReport& report) {
    report = {};
    if (params.subset_size < 3) throw Error(ErrorKind::InvalidArgument, "subset_size must be at least 3");
    if (c.size() < params.subset_size)
        throw Error(ErrorKind::InvalidArgument, "need at least " + std::to_string(params.subset_size) +
                                                    " correspondences, got " + std::to_string(c.size()));
    std::vector<Vec3> xs, ys;
    std::vector<double> ws;
    xs.reserve(c.size());
    for (const auto& m : c) {
        if (m.ref_index >= ref.size() || m.tgt_index >= tgt.size())
            throw Error(ErrorKind::InvalidArgument, "correspondence index out of range");
        xs.push_back(ref.positions[m.ref_index]);
        ys.push_back(tgt.positions[m.tgt_index]);
        ws.push_back(m.weight);
    }

    auto inlier_weights = [&](const Pose& pose) {
        std::vector<double> soft(ws.size(), 0.0);
        for (std::size_t i = 0; i < ws.size(); ++i)
            if ((pose(xs[i]) - ys[i]).norm() < params.inlier_tau) soft[i] = ws[i];
        return soft;
    };

    std::mt19937_64 rng(params.seed);
    bool found = false;
    Pose best;
    std::vector<Vec3> sx(params.subset_size), sy(params.subset_size);
    std::vector<double> sw(params.subset_size);
    for (std::size_t h = 0; h < params.n_hypotheses; ++h) {
        const auto subset = draw_subset(ws, params.subset_size, rng);
        for (std::size_t j = 0; j < subset.size(); ++j) {
            sx[j] = xs[subset[j]];
            sy[j] = ys[subset[j]];
            sw[j] = ws[subset[j]];
        }
        Pose hyp;
        try {
            hyp = weighted_procrustes(sx, sy, sw);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Degenerate) throw;
            ++report.degenerate_hypotheses;
            continue;
        }
        double score = 0;
        for (double v : inlier_weights(hyp)) score += v;
        if (!found || score > report.best_score) {
            found = true;
            best = hyp;
            report.best_score = score;
            report.best_hypothesis = h;
        }
    }
    if (!found) throw Error(ErrorKind::Degenerate, "every alignment hypothesis was degenerate");

    const std::vector<double> soft = inlier_weights(best);
    report.inliers = static_cast<std::size_t>(std::count_if(soft.begin(), soft.end(), [](double v) { return v > 0; }));
    try {
        return weighted_procrustes(xs, ys, soft);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Degenerate) throw;
        return best;
    }
}

}  // namespace gave
