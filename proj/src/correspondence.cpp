#include "gave/correspondence.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "gave/error.hpp"

namespace gave {

PointCloud build_feature_cloud(const RgbdFrame& frame, const FeatureMap& features, std::size_t* degenerate) {
    if (features.height() != frame.height || features.width() != frame.width)
        throw Error(ErrorKind::ShapeMismatch, "feature map " + shape_string(features.values.shape()) +
                                                  " does not match frame " + std::to_string(frame.height) + "x" +
                                                  std::to_string(frame.width));
    PointCloud cloud = unproject(frame);
    const std::size_t dim = features.channels();
    cloud.feature_dim = dim;
    cloud.features.resize(cloud.size() * dim);
    std::size_t replaced = 0;
    const float uniform = static_cast<float>(1.0 / std::sqrt(static_cast<double>(dim)));
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto [y, x] = cloud.pixel_origin[i];
        const float* src = features.values.data() + (static_cast<std::size_t>(y) * frame.width + x) * dim;
        float* dst = cloud.features.data() + i * dim;
        double norm2 = 0;
        for (std::size_t c = 0; c < dim; ++c) norm2 += static_cast<double>(src[c]) * src[c];
        if (!(norm2 > 0) || !std::isfinite(norm2)) {
            std::fill(dst, dst + dim, uniform);
            ++replaced;
            continue;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t c = 0; c < dim; ++c) dst[c] = static_cast<float>(src[c] * inv);
    }
    if (degenerate) *degenerate = replaced;
    return cloud;
}

namespace {

using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Candidate {
    std::size_t ref = 0;
    std::size_t tgt = 0;
    double weight = 0;
};

}  // namespace

CorrespondenceSet match_topk(const PointCloud& ref, const PointCloud& tgt, std::size_t k, std::size_t max_ref_points) {
    if (!ref.has_features() || ref.feature_dim != tgt.feature_dim)
        throw Error(ErrorKind::ShapeMismatch, "ref and tgt clouds need features of the same dimension");
    if (tgt.size() < 2) throw Error(ErrorKind::InvalidArgument, "matching needs at least 2 target points");
    if (ref.size() == 0 || k == 0) return {};
    max_ref_points = std::max<std::size_t>(1, max_ref_points);

    std::vector<std::size_t> ref_ids;
    if (ref.size() <= max_ref_points) {
        ref_ids.resize(ref.size());
        std::iota(ref_ids.begin(), ref_ids.end(), std::size_t{0});
    } else {
        for (std::size_t i = 0; i < max_ref_points; ++i) ref_ids.push_back(i * ref.size() / max_ref_points);
    }

    const auto dim = static_cast<Eigen::Index>(ref.feature_dim);
    const Eigen::Map<const FeatureMatrix> tgt_f(tgt.features.data(), static_cast<Eigen::Index>(tgt.size()), dim);
    FeatureMatrix ref_f(static_cast<Eigen::Index>(ref_ids.size()), dim);
    for (std::size_t r = 0; r < ref_ids.size(); ++r)
        ref_f.row(static_cast<Eigen::Index>(r)) =
            Eigen::Map<const Eigen::RowVectorXf>(ref.feature(ref_ids[r]), dim);

    // Best and second-best similarity per ref point, scanning targets in blocks.
    std::vector<float> best(ref_ids.size(), -std::numeric_limits<float>::infinity());
    std::vector<float> second(ref_ids.size(), -std::numeric_limits<float>::infinity());
    std::vector<std::size_t> best_idx(ref_ids.size(), 0);
    constexpr Eigen::Index kBlock = 2048;
    FeatureMatrix sims;
    for (Eigen::Index t0 = 0; t0 < tgt_f.rows(); t0 += kBlock) {
        const Eigen::Index n = std::min(kBlock, tgt_f.rows() - t0);
        sims.noalias() = ref_f * tgt_f.middleRows(t0, n).transpose();
        for (std::size_t r = 0; r < ref_ids.size(); ++r) {
            const float* row = sims.row(static_cast<Eigen::Index>(r)).data();
            float b = best[r], s = second[r];
            std::size_t bi = best_idx[r];
            for (Eigen::Index j = 0; j < n; ++j) {
                const float v = row[j];
                if (v > b) {
                    s = b;
                    b = v;
                    bi = static_cast<std::size_t>(t0 + j);
                } else if (v > s) {
                    s = v;
                }
            }
            best[r] = b;
            second[r] = s;
            best_idx[r] = bi;
        }
    }

    std::vector<Candidate> cands(ref_ids.size());
    for (std::size_t r = 0; r < ref_ids.size(); ++r) {
        const double d1 = std::max(0.0, 1.0 - static_cast<double>(best[r]));
        const double d2 = std::max(0.0, 1.0 - static_cast<double>(second[r]));
        const double w = d2 > 0 ? std::clamp(1.0 - d1 / d2, 0.0, 1.0) : 0.0;
        cands[r] = {ref_ids[r], best_idx[r], w};
    }
    const std::size_t keep = std::min(k, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                      [](const Candidate& a, const Candidate& b) {
                          return a.weight != b.weight ? a.weight > b.weight : a.ref < b.ref;
                      });
    CorrespondenceSet out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) out.push_back({cands[i].ref, cands[i].tgt, cands[i].weight});
    return out;
}

std::string format_correspondences(const CorrespondenceSet& set) {
    std::string out;
    char buf[96];
    for (const auto& c : set) {
        std::snprintf(buf, sizeof buf, "%zu %zu %.17g\n", c.ref_index, c.tgt_index, c.weight);
        out += buf;
    }
    return out;
}

}  // namespace gave
