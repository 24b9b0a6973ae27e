#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gave/extractors.hpp"
#include "gave/rgbd.hpp"

namespace gave {

struct Correspondence {
    std::size_t ref_index = 0;
    std::size_t tgt_index = 0;
    double weight = 0.0;  // in [0, 1]
    friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

/// At most k pairs, distinct ref indices, weights non-increasing.
using CorrespondenceSet = std::vector<Correspondence>;

/// unproject(frame) with each valid pixel's feature attached and
/// L2-normalized. Zero feature vectors become the uniform unit vector;
/// `degenerate` (optional) receives how many were replaced.
PointCloud build_feature_cloud(const RgbdFrame& frame, const FeatureMap& features, std::size_t* degenerate = nullptr);

/// Ratio-weighted nearest-neighbor matching by cosine distance
/// d = 1 - <f_r, f_t>. Each ref point's weight is 1 - d1/d2 from its two
/// nearest target features; the k best ref points are kept, ties broken by
/// the smaller ref index. At most `max_ref_points` ref points are
/// considered, picked by a uniform index stride; indices in the result
/// always refer to the full clouds.
CorrespondenceSet match_topk(const PointCloud& ref, const PointCloud& tgt, std::size_t k,
                             std::size_t max_ref_points = 5000);

/// Text dump, one "ref_index tgt_index weight" triple per line.
std::string format_correspondences(const CorrespondenceSet& set);

}  // namespace gave
