#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "../common/fixtures.hpp"
#include "gave/depth_preproc.hpp"
#include "gave/error.hpp"
#include "gave/llt.hpp"
#include "gave/oracle.hpp"

using namespace gave;

namespace {

GuidanceMap random_guidance(std::size_t h, std::size_t w, std::mt19937_64& rng) {
    return {fixtures::random_tensor({h, w, 1}, rng, 0.001f, 0.999f)};
}

SlicedCoefficients identity_coeffs(std::size_t h, std::size_t w, std::size_t groups, std::size_t m, float scale) {
    Tensor flat({h, w, groups * m * m});
    for (std::size_t p = 0; p < h * w; ++p)
        for (std::size_t g = 0; g < groups; ++g)
            for (std::size_t r = 0; r < m; ++r) flat[p * groups * m * m + g * m * m + r * m + r] = scale;
    return SlicedCoefficients::from_flat(std::move(flat), groups);
}

}  // namespace

TEST_CASE("slicing a constant grid returns the constant") {
    std::mt19937_64 rng(1);
    const BilateralGrid grid = BilateralGrid::from_features(Tensor({4, 3, 12}, 0.7f), 3);
    const Tensor out = slice(grid, random_guidance(32, 24, rng));
    CHECK(out.shape() == Shape{32, 24, 4});
    for (float v : out.values()) CHECK(v == 0.7f);
}

TEST_CASE("border pixels at node depths read grid nodes exactly") {
    std::mt19937_64 rng(2);
    const std::size_t n_grid = 4;
    const BilateralGrid grid = BilateralGrid::from_features(fixtures::random_tensor({2, 2, 8}, rng), n_grid);
    for (std::size_t z = 0; z < n_grid; ++z) {
        const float g = (static_cast<float>(z) + 0.5f) / static_cast<float>(n_grid);
        const Tensor out = slice(grid, GuidanceMap{Tensor({16, 16, 1}, g)});
        // Corner pixels sit outside the outermost cell centers, where
        // clamping collapses both neighbors onto the corner node.
        const std::array<std::array<std::size_t, 4>, 3> corners{{{0, 0, 0, 0}, {15, 15, 1, 1}, {0, 15, 0, 1}}};
        for (auto [y, x, gy, gx] : corners)
            for (std::size_t c = 0; c < 2; ++c) CHECK(out.at(y, x, c) == doctest::Approx(grid.at(gy, gx, c, z)));
    }
}

TEST_CASE("slice agrees with the trilinear oracle") {
    std::mt19937_64 rng(3);
    for (std::size_t n_grid : {2, 3, 4}) {
        const BilateralGrid grid = BilateralGrid::from_features(fixtures::random_tensor({3, 5, 6 * n_grid}, rng), n_grid);
        const GuidanceMap guide = random_guidance(24, 40, rng);
        const Tensor out = slice(grid, guide);
        for (std::size_t y = 0; y < 24; y += 5)
            for (std::size_t x = 0; x < 40; x += 3) {
                const auto expect = oracle::trilinear(grid, guide, y, x);
                for (std::size_t c = 0; c < 6; ++c) CHECK(out.at(y, x, c) == doctest::Approx(expect[c]).epsilon(1e-5));
            }
    }
}

TEST_CASE("a grid constant along depth ignores the guidance") {
    std::mt19937_64 rng(4);
    Tensor flat({2, 2, 12});
    const Tensor per_channel = fixtures::random_tensor({2, 2, 4}, rng);
    for (std::size_t p = 0; p < 4; ++p)
        for (std::size_t c = 0; c < 4; ++c)
            for (std::size_t z = 0; z < 3; ++z) flat[p * 12 + c * 3 + z] = per_channel[p * 4 + c];
    const BilateralGrid grid = BilateralGrid::from_features(flat, 3);
    const Tensor a = slice(grid, random_guidance(16, 16, rng));
    const Tensor b = slice(grid, random_guidance(16, 16, rng));
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-6));
}

TEST_CASE("slice is Lipschitz in the guidance") {
    std::mt19937_64 rng(5);
    const std::size_t n_grid = 3;
    const BilateralGrid grid = BilateralGrid::from_features(fixtures::random_tensor({2, 2, 3 * n_grid}, rng), n_grid);
    float spread = 0;
    for (float v : grid.values.values()) spread = std::max(spread, std::abs(v));
    GuidanceMap g = random_guidance(16, 16, rng), h = g;
    const float eps = 1e-3f;
    for (auto& v : h.values.values()) v = std::min(v + eps, 0.999f);
    const Tensor a = slice(grid, g), b = slice(grid, h);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 2 * spread * n_grid * eps + 1e-6f);
}

TEST_CASE("slice rejects mismatched extents") {
    const BilateralGrid grid = BilateralGrid::from_features(Tensor({2, 2, 6}), 3);
    CHECK_THROWS_AS(slice(grid, GuidanceMap{Tensor({16, 24, 1}, 0.5f)}), Error);
    CHECK_THROWS_AS(slice(grid, GuidanceMap{Tensor({20, 16, 1}, 0.5f)}), Error);
}

TEST_CASE("apply_llt") {
    std::mt19937_64 rng(6);
    const FeatureMap v{fixtures::random_tensor({8, 8, 16}, rng), 1};
    SUBCASE("identity blocks return the input") { CHECK(apply_llt(identity_coeffs(8, 8, 4, 4, 1.0f), v).values == v.values); }
    SUBCASE("scaled identity scales the input") {
        const FeatureMap out = apply_llt(identity_coeffs(8, 8, 4, 4, 2.0f), v);
        for (std::size_t i = 0; i < out.values.size(); ++i) CHECK(out.values[i] == 2.0f * v.values[i]);
    }
    SUBCASE("agrees with explicit block products") {
        for (std::size_t groups : {1, 2, 4, 8}) {
            const std::size_t m = 16 / groups;
            const auto coeffs = SlicedCoefficients::from_flat(fixtures::random_tensor({8, 8, groups * m * m}, rng), groups);
            const FeatureMap out = apply_llt(coeffs, v);
            for (std::size_t p = 0; p < 64; p += 7) {
                const auto expect = oracle::block_matmul(
                    std::span<const float>(coeffs.flat.data() + p * groups * m * m, groups * m * m),
                    std::span<const float>(v.values.data() + p * 16, 16), groups);
                for (std::size_t c = 0; c < 16; ++c)
                    CHECK(out.values[p * 16 + c] == doctest::Approx(expect[c]).epsilon(1e-5));
            }
        }
    }
    SUBCASE("linear in the visual features") {
        const auto coeffs = SlicedCoefficients::from_flat(fixtures::random_tensor({8, 8, 64}, rng), 4);
        const FeatureMap w{fixtures::random_tensor({8, 8, 16}, rng), 1};
        FeatureMap sum = v;
        for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += 3.0f * w.values[i];
        const auto a = apply_llt(coeffs, v), b = apply_llt(coeffs, w), s = apply_llt(coeffs, sum);
        for (std::size_t i = 0; i < s.values.size(); ++i)
            CHECK(s.values[i] == doctest::Approx(a.values[i] + 3.0f * b.values[i]).epsilon(1e-4));
    }
    SUBCASE("group size mismatch") {
        CHECK_THROWS_AS(apply_llt(identity_coeffs(8, 8, 2, 4, 1.0f), v), Error);
        CHECK_THROWS_AS(SlicedCoefficients::from_flat(Tensor({8, 8, 12}), 2), Error);
    }
}

TEST_CASE("fuse_multiscale") {
    FeatureMap a{Tensor({2, 2, 2}, 1.0f), 1}, b{Tensor({2, 2, 2}, 3.0f), 2};
    const FeatureMap m = fuse_multiscale({a, b});
    for (float v : m.values.values()) CHECK(v == 2.0f);
    CHECK(fuse_multiscale({a}).values == a.values);
    CHECK_THROWS_AS(fuse_multiscale({}), Error);
    CHECK_THROWS_AS(fuse_multiscale({a, FeatureMap{Tensor({2, 2, 3}), 2}}), Error);
}

TEST_CASE("extract_features") {
    SceneParams params = fixtures::small_scene(48, 32);
    params.hole_fraction = 0.05;
    const auto pair = gen_scene(3, params);
    for (std::size_t scales : {1, 2, 3}) {
        PipelineConfig cfg;
        cfg.llt = LltConfig::derived(3, 4, scales, 16);
        const ModelWeights w = init_weights(1, cfg.llt);
        const FeatureMap f = extract_features(pair.ref, w, cfg);
        CHECK(f.values.shape() == Shape{32, 48, 16});
        CHECK(extract_features(pair.ref, w, cfg).values == f.values);
        for (float v : f.values.values()) CHECK(std::isfinite(v));
    }
    SUBCASE("equals the composition of the stages") {
        PipelineConfig cfg;
        cfg.llt = LltConfig::derived(2, 2, 1, 8);
        const ModelWeights w = init_weights(2, cfg.llt);
        const Tensor depth = normalize_depth(fill_holes_jbf(pair.ref, cfg.jbf), cfg.normalization);
        const auto v = extract_visual(rgb_tensor(pair.ref), w, cfg.llt);
        const auto g = extract_geometric(depth, w, cfg.llt);
        const auto expect = apply_llt(slice(g[0], extract_guidance(depth, w), cfg.llt), v[0]);
        CHECK(extract_features(pair.ref, w, cfg).values == expect.values);
    }
}

TEST_CASE("every derived configuration satisfies the element-count identity") {
    for (std::size_t n_grid : {2, 3, 4, 6})
        for (std::size_t groups : {1, 2, 4, 8, 16, 32, 64}) {
            const LltConfig cfg = LltConfig::derived(n_grid, groups, 2);
            CHECK(cfg.d_d / cfg.n_grid == cfg.d_c * cfg.group_size());
        }
    CHECK_THROWS_AS(LltConfig::derived(3, 5, 2), Error);
    CHECK_THROWS_AS(LltConfig::derived(3, 16, 4), Error);
}
