#include "gave/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "gave/error.hpp"

namespace gave {

void SceneParams::validate() const {
    if (!(extent_m > 0) || !(max_rotation_deg >= 0) || max_rotation_deg > 90 || !(max_translation_m >= 0) ||
        !(noise_sigma >= 0) || !(hole_fraction >= 0) || !(hole_fraction < 1) || width < 8 || height < 8 ||
        !(focal > 0))
        throw Error(ErrorKind::InvalidArgument, "scene parameters out of range");
    if (max_translation_m > 0.2 * extent_m)
        throw Error(ErrorKind::InvalidArgument, "translation magnitude would leave the room");
}

void SceneParams::set(const std::string& assignments) {
    std::istringstream in(assignments);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::Format, "scene parameter '" + item + "' lacks '='");
        const std::string key = item.substr(0, eq);
        double value = 0;
        try {
            std::size_t used = 0;
            value = std::stod(item.substr(eq + 1), &used);
            if (used != item.size() - eq - 1) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            throw Error(ErrorKind::Format, "bad value for scene parameter '" + key + "'");
        }
        if (key == "n_shapes") n_shapes = static_cast<std::size_t>(value);
        else if (key == "extent_m") extent_m = value;
        else if (key == "max_rotation_deg") max_rotation_deg = value;
        else if (key == "max_translation_m") max_translation_m = value;
        else if (key == "noise_sigma") noise_sigma = value;
        else if (key == "hole_fraction") hole_fraction = value;
        else if (key == "width") width = static_cast<std::size_t>(value);
        else if (key == "height") height = static_cast<std::size_t>(value);
        else if (key == "focal") focal = value;
        else throw Error(ErrorKind::Format, "unknown scene parameter '" + key + "'");
    }
}

Intrinsics SceneParams::intrinsics() const {
    return {focal, focal, (static_cast<double>(width) - 1.0) / 2.0, (static_cast<double>(height) - 1.0) / 2.0, width,
            height};
}

Eigen::Vector3f Scene::Texture::at(const Vec3& p) const {
    Eigen::Vector3f c;
    for (int k = 0; k < 3; ++k) {
        const double s = std::sin(2.0 * std::numbers::pi * frequency.row(k).dot(p) + phase[k]);
        c[k] = static_cast<float>(base[k] * (0.55 + 0.45 * s));
    }
    return c;
}

Scene Scene::random(std::uint64_t seed, const SceneParams& params) {
    params.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    auto texture = [&] {
        Texture t;
        for (int k = 0; k < 3; ++k) {
            t.base[k] = uniform(0.3, 1.0);
            t.phase[k] = uniform(0.0, 2.0 * std::numbers::pi);
            for (int a = 0; a < 3; ++a) t.frequency(k, a) = uniform(-2.0, 2.0);
        }
        return t;
    };

    const double e = params.extent_m;
    Scene scene;
    scene.room_.lo = Vec3(-uniform(0.55, 0.65) * e, -uniform(0.28, 0.32) * e, -uniform(0.35, 0.45) * e);
    scene.room_.hi = Vec3(uniform(0.55, 0.65) * e, uniform(0.22, 0.28) * e, uniform(0.95, 1.05) * e);
    scene.room_.texture = texture();
    for (std::size_t i = 0; i < params.n_shapes; ++i) {
        const Vec3 half(uniform(0.04, 0.12) * e, uniform(0.04, 0.12) * e, uniform(0.04, 0.12) * e);
        const Vec3 center(uniform(-0.3, 0.3) * e, uniform(-0.1, 0.15) * e, uniform(0.45, 0.8) * e);
        scene.boxes_.push_back({center - half, center + half, texture()});
    }
    return scene;
}

std::optional<Scene::Hit> Scene::raycast(const Vec3& origin, const Vec3& dir) const {
    constexpr double eps = 1e-9;
    double best = std::numeric_limits<double>::infinity();
    const Texture* tex = nullptr;

    for (const auto& box : boxes_) {
        double t_near = -std::numeric_limits<double>::infinity(), t_far = std::numeric_limits<double>::infinity();
        bool miss = false;
        for (int a = 0; a < 3; ++a) {
            if (dir[a] == 0.0) {
                if (origin[a] < box.lo[a] || origin[a] > box.hi[a]) miss = true;
                continue;
            }
            double t0 = (box.lo[a] - origin[a]) / dir[a], t1 = (box.hi[a] - origin[a]) / dir[a];
            if (t0 > t1) std::swap(t0, t1);
            t_near = std::max(t_near, t0);
            t_far = std::min(t_far, t1);
        }
        if (miss || t_near > t_far || t_near <= eps) continue;
        if (t_near < best) best = t_near, tex = &box.texture;
    }

    // Room walls, seen from inside.
    double t_exit = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (dir[a] == 0.0) continue;
        const double bound = dir[a] > 0 ? room_.hi[a] : room_.lo[a];
        t_exit = std::min(t_exit, (bound - origin[a]) / dir[a]);
    }
    if (t_exit > eps && t_exit < best) best = t_exit, tex = &room_.texture;

    if (!tex) return std::nullopt;
    return Hit{best, tex->at(origin + best * dir)};
}

RgbdFrame Scene::render(const Intrinsics& intr, const Pose& camera_to_scene) const {
    intr.validate();
    RgbdFrame frame = RgbdFrame::blank(intr);
    for (std::size_t y = 0; y < frame.height; ++y) {
        for (std::size_t x = 0; x < frame.width; ++x) {
            const Vec3 ray((static_cast<double>(x) - intr.cx) / intr.fx, (static_cast<double>(y) - intr.cy) / intr.fy,
                           1.0);
            const auto hit = raycast(camera_to_scene.translation, camera_to_scene.rotation * ray);
            if (!hit) continue;
            // The camera-space ray has unit z, so the ray parameter is the depth.
            frame.depth_at(y, x) = static_cast<float>(hit->t);
            float* c = frame.rgb_at(y, x);
            for (int k = 0; k < 3; ++k) c[k] = std::clamp(hit->color[k], 0.0f, 1.0f);
        }
    }
    frame.refresh_mask();
    return frame;
}

namespace {

void degrade(RgbdFrame& frame, const SceneParams& params, std::mt19937_64& rng) {
    if (params.noise_sigma > 0) {
        std::normal_distribution<double> noise(0.0, params.noise_sigma);
        for (std::size_t i = 0; i < frame.pixel_count(); ++i)
            if (frame.valid[i]) frame.depth[i] = static_cast<float>(std::max(1e-3, frame.depth[i] + noise(rng)));
    }
    if (params.hole_fraction > 0) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t i = 0; i < frame.pixel_count(); ++i)
            if (unit(rng) < params.hole_fraction) frame.depth[i] = 0.0f;
    }
    frame.refresh_mask();
}

Pose random_pose(std::mt19937_64& rng, const SceneParams& params) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vec3 axis(gauss(rng), gauss(rng), gauss(rng));
    Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
    if (axis.norm() < 1e-12) axis = Vec3::UnitZ();
    if (dir.norm() < 1e-12) dir = Vec3::UnitX();
    const double angle = unit(rng) * params.max_rotation_deg * std::numbers::pi / 180.0;
    const double length = unit(rng) * params.max_translation_m;
    return {axis_angle(axis, angle), dir.normalized() * length};
}

}  // namespace

namespace {

ScenePair make_pair(std::uint64_t seed, const SceneParams& params, const Pose* fixed) {
    params.validate();
    ScenePair pair;
    pair.scene = Scene::random(seed, params);
    std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
    pair.gt = random_pose(rng, params);
    if (fixed) {
        if (!fixed->is_valid()) throw Error(ErrorKind::InvalidArgument, "relative pose is not a rigid transform");
        pair.gt = *fixed;
    }
    const Intrinsics intr = params.intrinsics();
    pair.ref = pair.scene.render(intr, Pose::identity());
    pair.tgt = pair.scene.render(intr, pose_inverse(pair.gt));
    degrade(pair.ref, params, rng);
    degrade(pair.tgt, params, rng);
    return pair;
}

}  // namespace

ScenePair gen_scene(std::uint64_t seed, const SceneParams& params) { return make_pair(seed, params, nullptr); }

ScenePair gen_scene(std::uint64_t seed, const SceneParams& params, const Pose& gt) {
    return make_pair(seed, params, &gt);
}

FeatureMap oracle_features(const RgbdFrame& frame, const Pose& camera_to_scene, std::size_t dim) {
    if (dim < 2) throw Error(ErrorKind::InvalidArgument, "oracle features need at least 2 channels");
    // Fixed frequency bank shared by every frame: equal magnitudes along
    // Fibonacci-sphere directions, so that for small offsets the feature
    // distance grows with the Euclidean distance alike in every direction.
    const std::size_t pairs = dim / 2;
    constexpr double kLengthScale = 0.15;  // meters
    const double magnitude = std::sqrt(3.0) / kLengthScale;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<Vec3> freq(pairs);
    for (std::size_t j = 0; j < pairs; ++j) {
        const double z = 1.0 - (2.0 * static_cast<double>(j) + 1.0) / static_cast<double>(pairs);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * static_cast<double>(j);
        freq[j] = magnitude * Vec3(r * std::cos(phi), r * std::sin(phi), z);
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(pairs));

    FeatureMap out{Tensor({frame.height, frame.width, dim}), 0};
    const auto& k = frame.intrinsics;
    for (std::size_t y = 0; y < frame.height; ++y) {
        for (std::size_t x = 0; x < frame.width; ++x) {
            if (!frame.valid[frame.index(y, x)]) continue;
            const double d = frame.depth_at(y, x);
            const Vec3 p = camera_to_scene(
                Vec3(d * ((static_cast<double>(x) - k.cx) / k.fx), d * ((static_cast<double>(y) - k.cy) / k.fy), d));
            float* dst = out.values.data() + frame.index(y, x) * dim;
            for (std::size_t j = 0; j < pairs; ++j) {
                const double phase = freq[j].dot(p);
                dst[2 * j] = static_cast<float>(scale * std::cos(phase));
                dst[2 * j + 1] = static_cast<float>(scale * std::sin(phase));
            }
        }
    }
    return out;
}

}  // namespace gave
