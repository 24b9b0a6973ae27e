#include "gave/rgbd.hpp"

#include <cmath>
#include <string>

#include "gave/error.hpp"

namespace gave {

void Intrinsics::validate() const {
    if (!(fx > 0) || !(fy > 0)) throw Error(ErrorKind::InvalidArgument, "focal lengths must be positive");
    if (width == 0 || height == 0) throw Error(ErrorKind::InvalidArgument, "image extents must be positive");
    if (!(cx >= 0 && cx < static_cast<double>(width)) || !(cy >= 0 && cy < static_cast<double>(height)))
        throw Error(ErrorKind::InvalidArgument, "principal point outside the image");
}

RgbdFrame RgbdFrame::blank(const Intrinsics& intr) {
    RgbdFrame f;
    f.height = intr.height;
    f.width = intr.width;
    f.intrinsics = intr;
    f.rgb.assign(3 * f.pixel_count(), 0.0f);
    f.depth.assign(f.pixel_count(), 0.0f);
    f.valid.assign(f.pixel_count(), 0);
    return f;
}

std::size_t RgbdFrame::valid_count() const {
    std::size_t n = 0;
    for (auto v : valid) n += v ? 1 : 0;
    return n;
}

void RgbdFrame::refresh_mask() {
    valid.resize(depth.size());
    for (std::size_t i = 0; i < depth.size(); ++i) valid[i] = depth[i] > 0.0f ? 1 : 0;
}

void RgbdFrame::validate() const {
    const std::size_t n = pixel_count();
    if (n == 0) throw Error(ErrorKind::Empty, "frame has no pixels");
    if (rgb.size() != 3 * n || depth.size() != n || valid.size() != n)
        throw Error(ErrorKind::ShapeMismatch, "frame buffers do not match " + std::to_string(height) + "x" +
                                                  std::to_string(width));
    if (intrinsics.width != width || intrinsics.height != height)
        throw Error(ErrorKind::ShapeMismatch, "intrinsics extents differ from frame extents");
    intrinsics.validate();
    for (float c : rgb)
        if (!(c >= 0.0f && c <= 1.0f)) throw Error(ErrorKind::InvalidArgument, "rgb value outside [0,1]");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(depth[i] >= 0.0f) || !std::isfinite(depth[i]))
            throw Error(ErrorKind::InvalidArgument, "depth must be finite and non-negative");
        if ((depth[i] > 0.0f) != (valid[i] != 0))
            throw Error(ErrorKind::InvalidArgument, "valid mask disagrees with depth");
    }
}

void PointCloud::validate() const {
    const std::size_t n = positions.size();
    if (!colors.empty() && colors.size() != n)
        throw Error(ErrorKind::ShapeMismatch, "colors length differs from positions");
    if (!pixel_origin.empty() && pixel_origin.size() != n)
        throw Error(ErrorKind::ShapeMismatch, "pixel_origin length differs from positions");
    if (features.size() != n * feature_dim)
        throw Error(ErrorKind::ShapeMismatch, "features length differs from N * feature_dim");
    for (const auto& p : positions)
        if (!p.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite point position");
}

PointCloud unproject(const RgbdFrame& frame) {
    const auto& k = frame.intrinsics;
    PointCloud cloud;
    const std::size_t n = frame.valid_count();
    cloud.positions.reserve(n);
    cloud.colors.reserve(n);
    cloud.pixel_origin.reserve(n);
    for (std::size_t y = 0; y < frame.height; ++y) {
        for (std::size_t x = 0; x < frame.width; ++x) {
            const std::size_t i = frame.index(y, x);
            if (!frame.valid[i]) continue;
            const double d = frame.depth[i];
            cloud.positions.emplace_back(d * ((static_cast<double>(x) - k.cx) / k.fx),
                                         d * ((static_cast<double>(y) - k.cy) / k.fy), d);
            const float* c = frame.rgb_at(y, x);
            cloud.colors.emplace_back(c[0], c[1], c[2]);
            cloud.pixel_origin.push_back({static_cast<std::int32_t>(y), static_cast<std::int32_t>(x)});
        }
    }
    return cloud;
}

std::optional<Eigen::Vector2d> project(const Vec3& point, const Intrinsics& intr) {
    if (!(point.z() > 0)) return std::nullopt;
    return Eigen::Vector2d(intr.fx * point.x() / point.z() + intr.cx, intr.fy * point.y() / point.z() + intr.cy);
}

RgbdFrame crop_to_multiple_of_8(const RgbdFrame& frame) {
    const std::size_t h = frame.height - frame.height % 8;
    const std::size_t w = frame.width - frame.width % 8;
    if (h == 0 || w == 0) throw Error(ErrorKind::ShapeMismatch, "frame smaller than 8x8");
    if (h == frame.height && w == frame.width) return frame;
    const std::size_t top = (frame.height - h) / 2, left = (frame.width - w) / 2;

    Intrinsics intr = frame.intrinsics;
    intr.width = w;
    intr.height = h;
    intr.cx -= static_cast<double>(left);
    intr.cy -= static_cast<double>(top);
    RgbdFrame out = RgbdFrame::blank(intr);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t src = frame.index(y + top, x + left), dst = out.index(y, x);
            out.depth[dst] = frame.depth[src];
            out.valid[dst] = frame.valid[src];
            for (int c = 0; c < 3; ++c) out.rgb[3 * dst + c] = frame.rgb[3 * src + c];
        }
    }
    return out;
}

}  // namespace gave
