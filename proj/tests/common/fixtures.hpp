#pragma once

// Scene and data builders shared by the unit and acceptance tests.

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gave/correspondence.hpp"
#include "gave/pose.hpp"
#include "gave/rgbd.hpp"
#include "gave/synth.hpp"
#include "gave/tensor.hpp"

namespace fixtures {

using gave::Pose;
using gave::Vec3;

inline gave::Tensor random_tensor(const gave::Shape& shape, std::mt19937_64& rng, float lo = -1.0f, float hi = 1.0f) {
    std::uniform_real_distribution<float> u(lo, hi);
    gave::Tensor t(shape);
    for (auto& v : t.values()) v = u(rng);
    return t;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3 v(n(rng), n(rng), n(rng));
    while (v.norm() < 1e-9) v = Vec3(n(rng), n(rng), n(rng));
    return v.normalized();
}

/// Small rigid motion of exactly `degrees` about a random axis and `meters`
/// along a random direction, applied after `base`.
inline Pose perturbed(const Pose& base, double degrees, double meters, std::mt19937_64& rng) {
    const Pose delta{gave::axis_angle(random_unit(rng), degrees * std::numbers::pi / 180.0),
                     meters * random_unit(rng)};
    return gave::pose_compose(delta, base);
}

/// Half turn about the optical axis. With the principal point at the image
/// center, pixel (y, x) of one view sees exactly what pixel
/// (H-1-y, W-1-x) of the other sees, so rendered and observed frames agree
/// bit for bit at the true pose.
inline Pose half_turn() {
    Pose p;
    p.rotation = Eigen::Vector3d(-1.0, -1.0, 1.0).asDiagonal();
    return p;
}

inline gave::SceneParams small_scene(std::size_t width, std::size_t height) {
    gave::SceneParams p;
    p.width = width;
    p.height = height;
    p.focal = 140.0 * static_cast<double>(width) / 160.0;
    return p;
}

/// Pixel-exact correspondences of a half-turn pair. Both frames must be
/// hole free, so cloud index equals pixel index.
inline gave::CorrespondenceSet half_turn_correspondences(const gave::RgbdFrame& ref, std::size_t stride = 1) {
    gave::CorrespondenceSet c;
    const std::size_t H = ref.height, W = ref.width;
    for (std::size_t i = 0; i < H * W; i += stride) {
        const std::size_t y = i / W, x = i % W;
        c.push_back({i, (H - 1 - y) * W + (W - 1 - x), 1.0});
    }
    return c;
}

/// Ground-truth matches by projection: each sampled reference point is
/// moved by gt, projected into the target and paired with that pixel when
/// the observed depth agrees within `depth_tol`.
inline gave::CorrespondenceSet projected_correspondences(const gave::PointCloud& ref, const gave::RgbdFrame& tgt,
                                                         const Pose& gt, std::size_t want, double depth_tol = 0.02) {
    std::vector<long> pixel_to_index(tgt.pixel_count(), -1);
    long next = 0;
    for (std::size_t i = 0; i < tgt.pixel_count(); ++i)
        if (tgt.valid[i]) pixel_to_index[i] = next++;
    gave::CorrespondenceSet c;
    const std::size_t step = std::max<std::size_t>(1, ref.size() / (4 * want));
    for (std::size_t i = 0; i < ref.size() && c.size() < want; i += step) {
        const Vec3 q = gt(ref.positions[i]);
        const auto uv = gave::project(q, tgt.intrinsics);
        if (!uv) continue;
        const double px = std::floor((*uv)[0] + 0.5), py = std::floor((*uv)[1] + 0.5);
        if (px < 0 || py < 0 || px >= static_cast<double>(tgt.width) || py >= static_cast<double>(tgt.height)) continue;
        const std::size_t pix = static_cast<std::size_t>(py) * tgt.width + static_cast<std::size_t>(px);
        if (pixel_to_index[pix] < 0 || std::abs(tgt.depth[pix] - q.z()) > depth_tol) continue;
        c.push_back({i, static_cast<std::size_t>(pixel_to_index[pix]), 1.0});
    }
    return c;
}

}  // namespace fixtures
