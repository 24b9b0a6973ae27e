#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "gave/pose.hpp"

namespace gave {

struct Intrinsics {
    double fx = 0, fy = 0, cx = 0, cy = 0;
    std::size_t width = 0, height = 0;

    /// Throws on non-positive focal lengths or a principal point outside the image.
    void validate() const;
    friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

struct PixelIndex {
    std::int32_t y = 0, x = 0;
    friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

/// One RGB-D observation. rgb is interleaved [H, W, 3] in [0, 1]; depth is in
/// meters with 0 marking a hole; valid[i] mirrors depth[i] > 0.
struct RgbdFrame {
    std::size_t height = 0, width = 0;
    std::vector<float> rgb;
    std::vector<float> depth;
    std::vector<std::uint8_t> valid;
    Intrinsics intrinsics;

    static RgbdFrame blank(const Intrinsics& intr);

    std::size_t pixel_count() const { return height * width; }
    std::size_t index(std::size_t y, std::size_t x) const { return y * width + x; }
    float& depth_at(std::size_t y, std::size_t x) { return depth[index(y, x)]; }
    float depth_at(std::size_t y, std::size_t x) const { return depth[index(y, x)]; }
    float* rgb_at(std::size_t y, std::size_t x) { return rgb.data() + 3 * index(y, x); }
    const float* rgb_at(std::size_t y, std::size_t x) const { return rgb.data() + 3 * index(y, x); }

    std::size_t valid_count() const;
    /// Recompute `valid` from depth.
    void refresh_mask();
    /// Checks array sizes and value ranges; throws gave::Error.
    void validate() const;
};

struct PointCloud {
    std::vector<Vec3> positions;
    std::vector<Eigen::Vector3f> colors;  // empty or one per point
    std::vector<float> features;          // row-major [N, feature_dim]
    std::size_t feature_dim = 0;
    std::vector<PixelIndex> pixel_origin;  // empty or one per point

    std::size_t size() const { return positions.size(); }
    bool has_colors() const { return !colors.empty(); }
    bool has_features() const { return feature_dim > 0; }
    const float* feature(std::size_t i) const { return features.data() + i * feature_dim; }
    void validate() const;
};

/// Back-projects every valid pixel, in row-major pixel order.
PointCloud unproject(const RgbdFrame& frame);

/// Pinhole projection to continuous pixel coordinates (x, y); nullopt when
/// the point is at or behind the camera plane.
std::optional<Eigen::Vector2d> project(const Vec3& point, const Intrinsics& intr);

/// Center-crops both extents down to multiples of 8, shifting the
/// principal point accordingly.
RgbdFrame crop_to_multiple_of_8(const RgbdFrame& frame);

}  // namespace gave
