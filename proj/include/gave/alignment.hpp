#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "gave/config.hpp"
#include "gave/correspondence.hpp"
#include "gave/pose.hpp"
#include "gave/rgbd.hpp"

namespace gave {

/// Closed-form minimizer of sum_i w_i |R x_i + t - y_i|^2 over rigid (R, t).
/// Throws Error(Degenerate) when the weighted cross-covariance has rank < 2
/// (e.g. collinear points), when fewer than 3 points carry weight, or when
/// the weights are negative or sum to zero.
Pose weighted_procrustes(std::span<const Vec3> x, std::span<const Vec3> y, std::span<const double> w);

/// Hypothesize-and-verify around weighted_procrustes.
///
/// Each of n_hypotheses draws subset_size correspondences without
/// replacement with probability proportional to weight, solves on them and
/// scores sum_i w_i [residual_i < inlier_tau]. The best hypothesis (lowest
/// index on ties) is refined by one solve over its inliers. The subset
/// sequence depends only on `seed`.
Pose align_randomized(const CorrespondenceSet& c, const PointCloud& ref, const PointCloud& tgt,
                      const AlignParams& params);

struct AlignReport {
    std::size_t best_hypothesis = 0;
    double best_score = 0;
    std::size_t inliers = 0;
    std::size_t degenerate_hypotheses = 0;
};
Pose align_randomized(const CorrespondenceSet& c, const PointCloud& ref, const PointCloud& tgt,
                      const AlignParams& params, AlignReport& report);

/// Jacobians of the 12 pose entries (R row-major, then t) with respect to
/// every input: d_x and d_y are 12 x 3N (point i, axis a at column 3i+a);
/// d_w is 12 x N.
struct ProcrustesGradient {
    Pose pose;
    Eigen::MatrixXd d_x;
    Eigen::MatrixXd d_y;
    Eigen::MatrixXd d_w;
};

/// Analytic derivative of weighted_procrustes through the SVD of the
/// cross-covariance. Throws Error(Degenerate) when two singular values
/// coincide within 1e-8 (relative to the largest), where the derivative of
/// the decomposition is undefined.
ProcrustesGradient procrustes_grad(std::span<const Vec3> x, std::span<const Vec3> y, std::span<const double> w);

/// Flattened pose entries in Jacobian row order.
Eigen::Matrix<double, 12, 1> pose_vector(const Pose& pose);

}  // namespace gave
