#pragma once

#include <cstdint>
#include <vector>

#include "gave/config.hpp"
#include "gave/tensor.hpp"
#include "gave/weights.hpp"

namespace gave {

/// Dense per-pixel features, [H, W, C].
struct FeatureMap {
    Tensor values;
    int scale_index = 0;

    std::size_t height() const { return values.dim(0); }
    std::size_t width() const { return values.dim(1); }
    std::size_t channels() const { return values.dim(2); }
};

/// Geometric coefficient volume of extent (H/8) x (W/8) x (d_d/n_grid) x n_grid.
/// The values are the unmodified [H/8, W/8, d_d] convolution output; the
/// 4-D shape is only a reinterpretation, so cell (y, x, c, z) lives at flat
/// offset (y * W/8 + x) * d_d + c * n_grid + z.
struct BilateralGrid {
    Tensor values;  // [H/8, W/8, d_d/n_grid, n_grid]
    int scale_index = 0;

    std::size_t height() const { return values.dim(0); }
    std::size_t width() const { return values.dim(1); }
    std::size_t channels() const { return values.dim(2); }
    std::size_t depth() const { return values.dim(3); }
    const float* cell(std::size_t y, std::size_t x) const {
        return values.data() + (y * width() + x) * channels() * depth();
    }
    float at(std::size_t y, std::size_t x, std::size_t c, std::size_t z) const {
        return cell(y, x)[c * depth() + z];
    }

    /// Wraps an [h, w, d_d] tensor without copying its values.
    static BilateralGrid from_features(Tensor features, std::size_t n_grid, int scale_index = 0);
    /// The [h, w, d_d] tensor the grid was reshaped from.
    Tensor flattened() const;
};

/// [H, W, 1] map strictly inside (0, 1).
struct GuidanceMap {
    Tensor values;

    std::size_t height() const { return values.dim(0); }
    std::size_t width() const { return values.dim(1); }
    float at(std::size_t y, std::size_t x) const { return values[y * width() + x]; }
};

/// V^0 = ConvBlock(d_c,3,1)(rgb); V^i = DilatedConvBlock(d_c,3,1,2)(V^{i-1}).
/// Returns V^1..V^{n_scales}.
std::vector<FeatureMap> extract_visual(const Tensor& rgb, const ModelWeights& weights, const LltConfig& cfg);

/// Three stride-2 stages to B^0 at 1/8 resolution, then stacked
/// ConvBlock(d_d,3,1) stages B^1..B^{n_scales}, each viewed as a grid.
std::vector<BilateralGrid> extract_geometric(const Tensor& normalized_depth, const ModelWeights& weights,
                                             const LltConfig& cfg);

/// G = sigmoid(Conv(1,3,1)(ConvBlock(3,3,1)(d))).
GuidanceMap extract_guidance(const Tensor& normalized_depth, const ModelWeights& weights);

/// Deterministic weights for `cfg`: kernels uniform in +-sqrt(6 / fan_in),
/// zero biases, identity normalization.
ModelWeights init_weights(std::uint64_t seed, const LltConfig& cfg);

}  // namespace gave
