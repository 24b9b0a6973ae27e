#pragma once

#include "gave/alignment.hpp"
#include "gave/config.hpp"
#include "gave/correspondence.hpp"
#include "gave/extractors.hpp"
#include "gave/rgbd.hpp"
#include "gave/weights.hpp"

namespace gave {

struct Registration {
    Pose pose;  // reference camera -> target camera
    CorrespondenceSet correspondences;
    PointCloud ref;  // feature clouds the indices refer to
    PointCloud tgt;
    AlignReport report;
    std::size_t degenerate_features = 0;
};

/// Matching and alignment for two frames whose dense features are already
/// known (network output or oracle descriptors).
Registration register_pair(const RgbdFrame& ref, const RgbdFrame& tgt, const FeatureMap& ref_features,
                           const FeatureMap& tgt_features, const PipelineConfig& cfg);

/// Runs the extractor on both frames, then register_pair.
Registration register_frames(const RgbdFrame& ref, const RgbdFrame& tgt, const ModelWeights& weights,
                             const PipelineConfig& cfg);

}  // namespace gave
