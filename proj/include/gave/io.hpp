#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gave/pose.hpp"
#include "gave/rgbd.hpp"

namespace gave {

/// Raw PNG samples, row-major interleaved, widened to 16 bits.
struct PngImage {
    std::size_t width = 0, height = 0, channels = 0;
    int bit_depth = 8;
    std::vector<std::uint16_t> samples;
};

PngImage read_png(const std::string& path);
void write_png(const PngImage& image, const std::string& path);

/// Key-value text: fx, fy, cx, cy, width, height.
Intrinsics load_intrinsics(const std::string& path);
void save_intrinsics(const Intrinsics& intr, const std::string& path);

/// Reads an 8-bit RGB PNG and a 16-bit millimeter depth PNG, converts to
/// [0,1] color and meters, then center-crops to multiples of 8.
RgbdFrame load_rgbd(const std::string& rgb_path, const std::string& depth_path, const Intrinsics& intr);
/// Inverse of load_rgbd (color rounded to 8 bits, depth to whole millimeters).
void save_rgbd(const RgbdFrame& frame, const std::string& rgb_path, const std::string& depth_path);

/// Row-major 4x4 homogeneous matrix, 16 whitespace-separated reals.
void save_pose(const Pose& pose, const std::string& path);
Pose load_pose(const std::string& path);
std::string format_pose(const Pose& pose);

/// ASCII PLY with x,y,z and, when present, red,green,blue as uchar.
void save_ply(const PointCloud& cloud, const std::string& path);
PointCloud load_ply(const std::string& path);

}  // namespace gave
