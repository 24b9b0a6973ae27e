#pragma once

#include <vector>

#include "gave/config.hpp"
#include "gave/extractors.hpp"
#include "gave/rgbd.hpp"

namespace gave {

/// Per-pixel coefficients sliced out of a bilateral grid.
///
/// `flat` is [H, W, d_c * m] with m = d_c / n_group. Each pixel's vector is
/// read as a row-major d_c x m matrix whose rows split into n_group blocks;
/// block g is the m x m matrix A^(g) that transforms channel group g.
struct SlicedCoefficients {
    Tensor flat;
    std::size_t n_group = 0;
    std::size_t group_size = 0;  // m

    std::size_t height() const { return flat.dim(0); }
    std::size_t width() const { return flat.dim(1); }
    std::size_t channels() const { return n_group * group_size; }

    /// A^(g)[row][col] at pixel (y, x).
    float group_entry(std::size_t y, std::size_t x, std::size_t g, std::size_t row, std::size_t col) const {
        return flat[(y * width() + x) * flat.dim(2) + (g * group_size + row) * group_size + col];
    }

    /// Groups an [H, W, n_group * m * m] tensor; throws if the last extent
    /// is not of that form.
    static SlicedCoefficients from_flat(Tensor flat, std::size_t n_group);
};

/// Trilinear readout of `grid` at every full-resolution pixel. Pixel
/// (y, x) with guidance g samples grid coordinates
/// ((y + 0.5) / 8 - 0.5, (x + 0.5) / 8 - 0.5, g * n_grid - 0.5); neighbor
/// indices are clamped at the grid borders.
Tensor slice(const BilateralGrid& grid, const GuidanceMap& guidance);

/// slice() wrapped with the grouping of `cfg`.
SlicedCoefficients slice(const BilateralGrid& grid, const GuidanceMap& guidance, const LltConfig& cfg);

/// F = concat_g A^(g) V^(g), evaluated independently at every pixel.
FeatureMap apply_llt(const SlicedCoefficients& coeffs, const FeatureMap& visual);

/// Elementwise mean of same-shaped maps.
FeatureMap fuse_multiscale(const std::vector<FeatureMap>& maps);

/// [H, W, 3] tensor view of a frame's color.
Tensor rgb_tensor(const RgbdFrame& frame);

/// Full extractor: hole filling, depth normalization, the three branches,
/// per-scale slicing and transform, then the multi-scale mean.
FeatureMap extract_features(const RgbdFrame& frame, const ModelWeights& weights, const PipelineConfig& cfg);

}  // namespace gave
