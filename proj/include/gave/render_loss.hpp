#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gave/config.hpp"
#include "gave/correspondence.hpp"
#include "gave/rgbd.hpp"

namespace gave {

struct RenderedView {
    std::size_t height = 0, width = 0;
    std::vector<float> rgb;            // [H, W, 3]
    std::vector<float> depth;          // meters, 0 where nothing landed
    std::vector<std::uint8_t> mask;    // 1 where at least one point landed
};

/// Hard z-buffer splatting: each colored point is moved by `pose`,
/// projected with `intr`, rounded to the nearest pixel, and the nearest
/// point per pixel wins. Points with z <= 0 are dropped.
RenderedView render_points(const PointCloud& cloud, const Pose& pose, const Intrinsics& intr);

struct MaskedLoss {
    double value = 0;
    std::size_t covered = 0;  // pixels where mask and target validity both hold
};

/// Mean absolute difference over all color channels of covered pixels.
MaskedLoss photometric_loss(const RenderedView& rendered, const RgbdFrame& target);
/// Mean absolute depth difference (meters) over covered pixels.
MaskedLoss depth_loss(const RenderedView& rendered, const RgbdFrame& target);

/// sum_i w_i |pose(x_i) - y_i| / sum_i w_i.
double correspondence_loss(const CorrespondenceSet& c, const PointCloud& ref, const PointCloud& tgt, const Pose& pose);

struct LossBreakdown {
    double photometric = 0;
    double depth = 0;
    double correspondence = 0;
    double total = 0;
};

/// Weighted sum of the three consistency terms, each averaged over the
/// ref->tgt direction (with `pose`) and the tgt->ref direction (with its
/// inverse). Correspondence indices refer to unproject() of each frame.
LossBreakdown total_loss(const RgbdFrame& ref, const RgbdFrame& tgt, const Pose& pose, const CorrespondenceSet& c,
                         const LossWeights& weights);

}  // namespace gave
