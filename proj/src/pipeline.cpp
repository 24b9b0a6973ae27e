#include "gave/pipeline.hpp"

#include "gave/error.hpp"
#include "gave/llt.hpp"

namespace gave {

Registration register_pair(const RgbdFrame& ref, const RgbdFrame& tgt, const FeatureMap& ref_features,
                           const FeatureMap& tgt_features, const PipelineConfig& cfg) {
    cfg.validate();
    Registration out;
    std::size_t bad_ref = 0, bad_tgt = 0;
    out.ref = build_feature_cloud(ref, ref_features, &bad_ref);
    out.tgt = build_feature_cloud(tgt, tgt_features, &bad_tgt);
    out.degenerate_features = bad_ref + bad_tgt;
    out.correspondences = match_topk(out.ref, out.tgt, cfg.llt.k, cfg.match.max_ref_points);
    if (out.correspondences.size() < cfg.align.subset_size)
        throw Error(ErrorKind::Degenerate, "only " + std::to_string(out.correspondences.size()) +
                                               " correspondences for a subset size of " +
                                               std::to_string(cfg.align.subset_size));
    out.pose = align_randomized(out.correspondences, out.ref, out.tgt, cfg.align, out.report);
    return out;
}

Registration register_frames(const RgbdFrame& ref, const RgbdFrame& tgt, const ModelWeights& weights,
                             const PipelineConfig& cfg) {
    const FeatureMap f_ref = extract_features(ref, weights, cfg);
    const FeatureMap f_tgt = extract_features(tgt, weights, cfg);
    return register_pair(ref, tgt, f_ref, f_tgt, cfg);
}

}  // namespace gave
