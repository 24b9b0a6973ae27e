#include <doctest.h>

#include <random>

#include "../common/fixtures.hpp"
#include "gave/error.hpp"
#include "gave/render_loss.hpp"

using namespace gave;

namespace {

const Intrinsics kSmall{10.0, 10.0, 2.0, 2.0, 5, 5};

PointCloud colored(std::vector<Vec3> pts, std::vector<Eigen::Vector3f> colors) {
    PointCloud c;
    c.positions = std::move(pts);
    c.colors = std::move(colors);
    return c;
}

RgbdFrame filled(const Intrinsics& k, float depth, float color) {
    RgbdFrame f = RgbdFrame::blank(k);
    std::fill(f.depth.begin(), f.depth.end(), depth);
    std::fill(f.rgb.begin(), f.rgb.end(), color);
    f.refresh_mask();
    return f;
}

}  // namespace

TEST_CASE("the nearest point wins each pixel regardless of order") {
    const Eigen::Vector3f red(1, 0, 0), blue(0, 0, 1);
    const auto near_first = colored({Vec3(0, 0, 1), Vec3(0, 0, 2)}, {red, blue});
    const auto far_first = colored({Vec3(0, 0, 2), Vec3(0, 0, 1)}, {blue, red});
    for (const auto* cloud : {&near_first, &far_first}) {
        const RenderedView v = render_points(*cloud, Pose::identity(), kSmall);
        const std::size_t center = 2 * 5 + 2;
        CHECK(v.mask[center] == 1);
        CHECK(v.depth[center] == 1.0f);
        CHECK(v.rgb[3 * center] == 1.0f);
        CHECK(std::count(v.mask.begin(), v.mask.end(), 1) == 1);
    }
}

TEST_CASE("points behind the camera or off the image are dropped") {
    const Eigen::Vector3f white(1, 1, 1);
    const auto cloud = colored({Vec3(0, 0, -1), Vec3(0, 0, 0), Vec3(10, 0, 1), Vec3(0.1, 0.1, 1)}, {white, white, white, white});
    const RenderedView v = render_points(cloud, Pose::identity(), kSmall);
    CHECK(std::count(v.mask.begin(), v.mask.end(), 1) == 1);
    CHECK(v.mask[3 * 5 + 3] == 1);
    CHECK_THROWS_AS(render_points(PointCloud{}, Pose::identity(), kSmall), Error);
    PointCloud bare;
    bare.positions = {Vec3(0, 0, 1)};
    CHECK_THROWS_AS(render_points(bare, Pose::identity(), kSmall), Error);
}

TEST_CASE("rendering a frame's own cloud reproduces it") {
    const auto pair = gen_scene(3, fixtures::small_scene(48, 32));
    const RenderedView v = render_points(unproject(pair.ref), Pose::identity(), pair.ref.intrinsics);
    for (std::size_t i = 0; i < pair.ref.pixel_count(); ++i) {
        CHECK(v.mask[i] == pair.ref.valid[i]);
        CHECK(v.depth[i] == pair.ref.depth[i]);
    }
    CHECK(photometric_loss(v, pair.ref).value == 0.0);
    CHECK(depth_loss(v, pair.ref).value == 0.0);
}

TEST_CASE("masked losses") {
    const RgbdFrame target = filled(kSmall, 2.0f, 0.25f);
    RenderedView v;
    v.height = v.width = 5;
    v.rgb.assign(75, 0.5f);
    v.depth.assign(25, 2.5f);
    v.mask.assign(25, 0);
    v.mask[0] = v.mask[7] = 1;
    const MaskedLoss p = photometric_loss(v, target), d = depth_loss(v, target);
    CHECK(p.covered == 2);
    CHECK(p.value == doctest::Approx(0.25));
    CHECK(d.value == doctest::Approx(0.5));
    RgbdFrame holey = target;
    holey.depth[0] = holey.depth[7] = 0.0f;
    holey.refresh_mask();
    CHECK_THROWS_AS(photometric_loss(v, holey), Error);
    CHECK_THROWS_AS(depth_loss(v, filled({10, 10, 2, 2, 6, 5}, 1.0f, 0.0f)), Error);
}

TEST_CASE("correspondence loss") {
    PointCloud ref, tgt;
    ref.positions = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
    tgt.positions = {Vec3(0, 0, 1), Vec3(1, 0, 3)};
    const Pose shift{Mat3::Identity(), Vec3(0, 0, 1)};
    CHECK(correspondence_loss({{0, 0, 1.0}}, ref, tgt, shift) == 0.0);
    CHECK(correspondence_loss({{0, 0, 1.0}, {1, 1, 3.0}}, ref, tgt, shift) == doctest::Approx(1.5));
    CHECK_THROWS_AS(correspondence_loss({}, ref, tgt, shift), Error);
    CHECK_THROWS_AS(correspondence_loss({{0, 0, 0.0}}, ref, tgt, shift), Error);
    CHECK_THROWS_AS(correspondence_loss({{2, 0, 1.0}}, ref, tgt, shift), Error);
}

TEST_CASE("total loss") {
    const auto pair = gen_scene(4, fixtures::small_scene(48, 32), fixtures::half_turn());
    const auto c = fixtures::half_turn_correspondences(pair.ref, 3);
    SUBCASE("vanishes at the true pose of a pixel-exact pair") {
        const LossBreakdown l = total_loss(pair.ref, pair.tgt, pair.gt, c, {});
        CHECK(l.total == 0.0);
    }
    SUBCASE("grows away from the true pose") {
        std::mt19937_64 rng(4);
        const double at_truth = total_loss(pair.ref, pair.tgt, pair.gt, c, {}).total;
        for (int k = 0; k < 5; ++k) {
            const Pose off = fixtures::perturbed(pair.gt, 2.0, 0.02, rng);
            const LossBreakdown l = total_loss(pair.ref, pair.tgt, off, c, {});
            CHECK(l.total > at_truth);
            CHECK(l.correspondence > 0.0);
        }
    }
    SUBCASE("swapping the frames and inverting the pose gives the same value") {
        std::mt19937_64 rng(5);
        const Pose off = fixtures::perturbed(pair.gt, 3.0, 0.03, rng);
        CorrespondenceSet swapped;
        for (const auto& m : c) swapped.push_back({m.tgt_index, m.ref_index, m.weight});
        const LossBreakdown a = total_loss(pair.ref, pair.tgt, off, c, {0.5, 2.0, 1.5});
        const LossBreakdown b = total_loss(pair.tgt, pair.ref, pose_inverse(off), swapped, {0.5, 2.0, 1.5});
        CHECK(a.photometric == b.photometric);
        CHECK(a.depth == b.depth);
        CHECK(a.correspondence == doctest::Approx(b.correspondence).epsilon(1e-12));
    }
    SUBCASE("weights scale the terms") {
        std::mt19937_64 rng(6);
        const Pose off = fixtures::perturbed(pair.gt, 3.0, 0.03, rng);
        const LossBreakdown l = total_loss(pair.ref, pair.tgt, off, c, {2.0, 0.0, 0.5});
        CHECK(l.total == doctest::Approx(2.0 * l.photometric + 0.5 * l.correspondence));
    }
}
