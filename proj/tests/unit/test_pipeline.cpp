#include <doctest.h>

#include "../common/fixtures.hpp"
#include "gave/error.hpp"
#include "gave/metrics.hpp"
#include "gave/pipeline.hpp"

using namespace gave;

TEST_CASE("oracle descriptors register a synthetic pair") {
    const auto pair = gen_scene(1, SceneParams{});
    const PipelineConfig cfg;
    const Registration r = register_pair(pair.ref, pair.tgt, oracle_features(pair.ref, Pose::identity()),
                                         oracle_features(pair.tgt, pose_inverse(pair.gt)), cfg);
    CHECK(rotation_error(r.pose.rotation, pair.gt.rotation) < 0.1);
    CHECK(translation_error(r.pose.translation, pair.gt.translation) < 1.0);
    CHECK(r.correspondences.size() == cfg.llt.k);
    CHECK(r.degenerate_features == 0);
}

TEST_CASE("identical frames register to the identity with random weights") {
    const auto pair = gen_scene(2, fixtures::small_scene(64, 48));
    PipelineConfig cfg;
    cfg.llt = LltConfig::derived(3, 4, 2, 16);
    const Registration r = register_frames(pair.ref, pair.ref, init_weights(2, cfg.llt), cfg);
    CHECK(rotation_error(r.pose.rotation, Mat3::Identity()) < 1e-6);
    CHECK(r.pose.translation.norm() < 1e-6);
}

TEST_CASE("too few correspondences is reported as degenerate") {
    const auto pair = gen_scene(3, fixtures::small_scene(32, 24));
    PipelineConfig cfg;
    cfg.llt.k = 5;
    try {
        register_pair(pair.ref, pair.tgt, oracle_features(pair.ref, Pose::identity()),
                      oracle_features(pair.tgt, pose_inverse(pair.gt)), cfg);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Degenerate);
    }
}
