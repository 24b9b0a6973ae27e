#pragma once

// Slow reference computations used to check the fast paths. Nothing here
// calls the kernels it is meant to verify; only the plain data types are
// shared.

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gave/correspondence.hpp"
#include "gave/extractors.hpp"
#include "gave/pose.hpp"
#include "gave/rgbd.hpp"
#include "gave/tensor.hpp"

namespace gave::oracle {

/// Direct nested-sum convolution in double precision, same padding rule
/// as the contract ("same" at stride 1, ceil-division output extents).
Tensor conv(const Tensor& input, const ConvParams& p);

/// Trilinear readout of one pixel, computed from the raw [h, w, d_d]
/// values and the grid depth.
std::vector<double> trilinear(const BilateralGrid& grid, const GuidanceMap& guidance, std::size_t y, std::size_t x);

/// F at one pixel from its flat coefficient vector and visual feature,
/// as n_group explicit m x m by m x 1 products.
std::vector<double> block_matmul(std::span<const float> coeffs, std::span<const float> visual, std::size_t n_group);

/// Exhaustive symmetric Chamfer distance in centimeters.
double chamfer(std::span<const Vec3> a, std::span<const Vec3> b);

/// Exhaustive ratio-weighted matcher over every ref point (no stride cap),
/// distances in double precision. Same output contract as match_topk.
CorrespondenceSet match(const PointCloud& ref, const PointCloud& tgt, std::size_t k);

/// Central differences of a vector-valued function; column j holds the
/// derivative with respect to x[j].
Eigen::MatrixXd central_difference(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double step);

/// Mean of |a - b| over the entries selected by `mask` (per pixel, over
/// `channels` interleaved values).
double masked_mean_abs(std::span<const float> a, std::span<const float> b, std::span<const std::uint8_t> mask,
                       std::size_t channels);

/// Deliberately broken variants of the fast paths. The self test checks
/// that the oracles above tell each of them apart from the real kernels.
namespace mutant {
Tensor conv_shifted_padding(const Tensor& input, const ConvParams& p);
std::vector<double> trilinear_no_half_cell(const BilateralGrid& grid, const GuidanceMap& guidance, std::size_t y,
                                           std::size_t x);
std::vector<double> block_matmul_transposed(std::span<const float> coeffs, std::span<const float> visual,
                                            std::size_t n_group);
double chamfer_one_sided(std::span<const Vec3> a, std::span<const Vec3> b);
}  // namespace mutant

struct GradcheckResult {
    double max_relative_error = 0;
    std::size_t trials = 0;
    std::size_t entries = 0;  // Jacobian entries compared
};

/// Per-entry relative difference used by the gradient check:
/// |a - n| / max(|a|, |n|, 1e-6).
double relative_difference(double analytic, double numeric);

/// procrustes_grad against central differences (step 1e-5) on random
/// well-conditioned instances of `points` correspondences.
GradcheckResult gradcheck(std::uint64_t seed, std::size_t trials, std::size_t points = 20);

/// Uniformly distributed rotation from a normalized Gaussian quaternion.
Mat3 random_rotation(std::uint64_t seed);

struct SelftestResult {
    std::size_t passed = 0;
    std::size_t failed = 0;
};

/// Runs every oracle comparison and the planted-bug fixture, printing one
/// line per check. Deterministic for a given seed.
SelftestResult run_selftest(std::ostream& out, std::uint64_t seed = 7);

}  // namespace gave::oracle
