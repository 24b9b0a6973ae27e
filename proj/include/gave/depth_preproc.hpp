#pragma once

#include <cstddef>
#include <vector>

#include "gave/config.hpp"
#include "gave/rgbd.hpp"
#include "gave/tensor.hpp"

namespace gave {

struct FillReport {
    int iterations = 0;              // filtering passes that filled at least one pixel
    std::size_t filled_by_filter = 0;
    std::size_t filled_by_median = 0;  // holes unreachable within max_iterations
    float median_depth = 0.0f;
};

/// Joint bilateral hole filling guided by the frame's color. Each pass
/// fills every hole that has at least one valid pixel within the window,
/// reading only the previous pass's depth. Originally valid pixels are
/// never modified. Holes still open after max_iterations receive the
/// median valid depth and are counted in the report.
RgbdFrame fill_holes_jbf(const RgbdFrame& frame, const JbfParams& params, FillReport* report = nullptr);

/// Maps hole-free metric depth into [0, 1) via sigmoid(scale * d + offset).
/// Returns an [H, W, 1] tensor.
Tensor normalize_depth(const RgbdFrame& filled, const DepthNormalization& norm = {});
float normalize_depth_value(float depth, const DepthNormalization& norm = {});

}  // namespace gave
