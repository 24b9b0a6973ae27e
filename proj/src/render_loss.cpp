#include "gave/render_loss.hpp"

#include <cmath>

#include "gave/error.hpp"

namespace gave {

RenderedView render_points(const PointCloud& cloud, const Pose& pose, const Intrinsics& intr) {
    if (cloud.size() == 0) throw Error(ErrorKind::Empty, "cannot render an empty cloud");
    if (!cloud.has_colors()) throw Error(ErrorKind::InvalidArgument, "rendering needs point colors");
    RenderedView view;
    view.height = intr.height;
    view.width = intr.width;
    view.rgb.assign(3 * view.height * view.width, 0.0f);
    view.depth.assign(view.height * view.width, 0.0f);
    view.mask.assign(view.height * view.width, 0);

    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3 p = pose(cloud.positions[i]);
        const auto uv = project(p, intr);
        if (!uv) continue;
        const double px = std::floor((*uv)[0] + 0.5), py = std::floor((*uv)[1] + 0.5);
        if (px < 0 || py < 0 || px >= static_cast<double>(view.width) || py >= static_cast<double>(view.height)) continue;
        const std::size_t idx = static_cast<std::size_t>(py) * view.width + static_cast<std::size_t>(px);
        const auto z = static_cast<float>(p.z());
        if (view.mask[idx] && !(z < view.depth[idx])) continue;
        view.mask[idx] = 1;
        view.depth[idx] = z;
        for (int c = 0; c < 3; ++c) view.rgb[3 * idx + c] = cloud.colors[i][c];
    }
    return view;
}

namespace {

void check_extents(const RenderedView& r, const RgbdFrame& t) {
    if (r.height != t.height || r.width != t.width)
        throw Error(ErrorKind::ShapeMismatch, "rendered view and target frame differ in size");
}

}  // namespace

MaskedLoss photometric_loss(const RenderedView& rendered, const RgbdFrame& target) {
    check_extents(rendered, target);
    MaskedLoss loss;
    double sum = 0;
    for (std::size_t i = 0; i < target.pixel_count(); ++i) {
        if (!rendered.mask[i] || !target.valid[i]) continue;
        ++loss.covered;
        for (int c = 0; c < 3; ++c) sum += std::abs(static_cast<double>(rendered.rgb[3 * i + c]) - target.rgb[3 * i + c]);
    }
    if (loss.covered == 0) throw Error(ErrorKind::Empty, "uninformative pair: no covered pixels");
    loss.value = sum / (3.0 * static_cast<double>(loss.covered));
    return loss;
}

MaskedLoss depth_loss(const RenderedView& rendered, const RgbdFrame& target) {
    check_extents(rendered, target);
    MaskedLoss loss;
    double sum = 0;
    for (std::size_t i = 0; i < target.pixel_count(); ++i) {
        if (!rendered.mask[i] || !target.valid[i]) continue;
        ++loss.covered;
        sum += std::abs(static_cast<double>(rendered.depth[i]) - target.depth[i]);
    }
    if (loss.covered == 0) throw Error(ErrorKind::Empty, "uninformative pair: no covered pixels");
    loss.value = sum / static_cast<double>(loss.covered);
    return loss;
}

double correspondence_loss(const CorrespondenceSet& c, const PointCloud& ref, const PointCloud& tgt, const Pose& pose) {
    if (c.empty()) throw Error(ErrorKind::Empty, "correspondence loss needs at least one pair");
    double num = 0, den = 0;
    for (const auto& m : c) {
        if (m.ref_index >= ref.size() || m.tgt_index >= tgt.size())
            throw Error(ErrorKind::InvalidArgument, "correspondence index out of range");
        num += m.weight * (pose(ref.positions[m.ref_index]) - tgt.positions[m.tgt_index]).norm();
        den += m.weight;
    }
    if (!(den > 0)) throw Error(ErrorKind::Degenerate, "correspondence weights sum to zero");
    return num / den;
}

LossBreakdown total_loss(const RgbdFrame& ref, const RgbdFrame& tgt, const Pose& pose, const CorrespondenceSet& c,
                         const LossWeights& weights) {
    const PointCloud ref_cloud = unproject(ref);
    const PointCloud tgt_cloud = unproject(tgt);
    const Pose inverse = pose_inverse(pose);

    const RenderedView forward = render_points(ref_cloud, pose, tgt.intrinsics);
    const RenderedView backward = render_points(tgt_cloud, inverse, ref.intrinsics);

    CorrespondenceSet swapped;
    swapped.reserve(c.size());
    for (const auto& m : c) swapped.push_back({m.tgt_index, m.ref_index, m.weight});

    LossBreakdown out;
    out.photometric = 0.5 * (photometric_loss(forward, tgt).value + photometric_loss(backward, ref).value);
    out.depth = 0.5 * (depth_loss(forward, tgt).value + depth_loss(backward, ref).value);
    out.correspondence = 0.5 * (correspondence_loss(c, ref_cloud, tgt_cloud, pose) +
                                correspondence_loss(swapped, tgt_cloud, ref_cloud, inverse));
    out.total = weights.photometric * out.photometric + weights.depth * out.depth +
                weights.correspondence * out.correspondence;
    return out;
}

}  // namespace gave
