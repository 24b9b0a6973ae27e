#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gave/extractors.hpp"
#include "gave/pose.hpp"
#include "gave/rgbd.hpp"

namespace gave {

struct SceneParams {
    std::size_t n_shapes = 4;        // boxes placed inside the room
    double extent_m = 3.0;           // distance from the first camera to the far wall
    double max_rotation_deg = 20.0;  // pose magnitude
    double max_translation_m = 0.3;
    double noise_sigma = 0.0;        // depth noise, meters
    double hole_fraction = 0.0;      // fraction of pixels zeroed per frame
    std::size_t width = 160;
    std::size_t height = 120;
    double focal = 140.0;            // fx = fy; principal point at the image center

    void validate() const;
    /// Applies `key=value[,key=value...]`; keys match the field names.
    void set(const std::string& assignments);
    Intrinsics intrinsics() const;
};

/// Sinusoidally textured axis-aligned geometry: a closed room with boxes
/// inside. Coordinates are those of the first (reference) camera: x right,
/// y down, z forward.
class Scene {
public:
    struct Hit {
        double t = 0;
        Eigen::Vector3f color = Eigen::Vector3f::Zero();
    };

    static Scene random(std::uint64_t seed, const SceneParams& params);

    /// Nearest intersection along origin + t * dir with t > 0.
    std::optional<Hit> raycast(const Vec3& origin, const Vec3& dir) const;

    /// Noiseless, hole-free view from a camera whose pose maps camera
    /// coordinates to scene coordinates.
    RgbdFrame render(const Intrinsics& intr, const Pose& camera_to_scene) const;

private:
    struct Texture {
        Eigen::Vector3d base;
        Eigen::Matrix3d frequency;  // row c: spatial frequency of channel c, cycles per meter
        Eigen::Vector3d phase;
        Eigen::Vector3f at(const Vec3& p) const;
    };
    struct Box {
        Vec3 lo, hi;
        Texture texture;
    };

    Box room_;  // seen from inside
    std::vector<Box> boxes_;
};

struct ScenePair {
    RgbdFrame ref;
    RgbdFrame tgt;
    Pose gt;  // maps reference-camera coordinates to target-camera coordinates
    Scene scene;
};

/// Two views of a random scene related by a random rigid motion within the
/// configured magnitude, with optional depth noise and holes.
ScenePair gen_scene(std::uint64_t seed, const SceneParams& params);
/// Same scene and degradation, with the relative motion given explicitly.
ScenePair gen_scene(std::uint64_t seed, const SceneParams& params, const Pose& gt);

/// Perfect descriptors: each valid pixel's point is mapped to scene
/// coordinates with `camera_to_scene` and encoded as `dim` unit-norm random
/// Fourier features of that position, so co-visible points agree across
/// views. Invalid pixels get zero vectors.
FeatureMap oracle_features(const RgbdFrame& frame, const Pose& camera_to_scene, std::size_t dim = 64);

}  // namespace gave
