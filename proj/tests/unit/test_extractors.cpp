#include <doctest.h>

#include <cmath>
#include <random>

#include "../common/fixtures.hpp"
#include "gave/error.hpp"
#include "gave/extractors.hpp"

using namespace gave;

namespace {

// Positive kernels on a positive input keep every rectifier active, so a
// perturbation reaches the output exactly where the receptive field allows.
ModelWeights positive_weights(const LltConfig& cfg) {
    ModelWeights w = init_weights(3, cfg);
    for (auto& [name, t] : w)
        if (name.ends_with(".kernel"))
            for (auto& v : t.values()) v = std::abs(v) + 0.01f;
    return w;
}

}  // namespace

TEST_CASE("branch output shapes for a 64x64 frame") {
    std::mt19937_64 rng(1);
    const LltConfig cfg;
    const ModelWeights w = init_weights(1, cfg);
    const Tensor rgb = fixtures::random_tensor({64, 64, 3}, rng, 0.0f, 1.0f);
    const Tensor depth = fixtures::random_tensor({64, 64, 1}, rng, 0.1f, 0.9f);

    const auto visual = extract_visual(rgb, w, cfg);
    REQUIRE(visual.size() == 2);
    for (const auto& v : visual) CHECK(v.values.shape() == Shape{64, 64, 64});

    const auto grids = extract_geometric(depth, w, cfg);
    REQUIRE(grids.size() == 2);
    for (const auto& g : grids) CHECK(g.values.shape() == Shape{8, 8, 256, 3});

    const GuidanceMap guide = extract_guidance(depth, w);
    CHECK(guide.values.shape() == Shape{64, 64, 1});
    for (float v : guide.values.values()) {
        CHECK(v > 0.0f);
        CHECK(v < 1.0f);
    }
}

TEST_CASE("n_grid 4 derives d_d 1024 and an 8x8x256x4 grid") {
    const LltConfig cfg = LltConfig::derived(4, 16, 1);
    CHECK(cfg.d_d == 1024);
    std::mt19937_64 rng(2);
    const auto grids = extract_geometric(fixtures::random_tensor({64, 64, 1}, rng, 0.1f, 0.9f), init_weights(2, cfg), cfg);
    CHECK(grids.at(0).values.shape() == Shape{8, 8, 256, 4});

    LltConfig stale = LltConfig{};
    stale.n_grid = 4;  // d_d left at 768
    CHECK_THROWS_AS(stale.validate(), Error);
}

TEST_CASE("zero image through zero biases gives zero visual features") {
    const LltConfig cfg = LltConfig::derived(3, 4, 3, 16);
    const auto maps = extract_visual(Tensor({16, 16, 3}), init_weights(4, cfg), cfg);
    REQUIRE(maps.size() == 3);
    for (const auto& m : maps)
        for (float v : m.values.values()) CHECK(v == 0.0f);
}

TEST_CASE("visual receptive fields") {
    const LltConfig cfg = LltConfig::derived(3, 4, 2, 8);
    const ModelWeights w = positive_weights(cfg);
    const std::size_t n = 21, c = 10;
    const Tensor base({n, n, 3}, 0.5f);
    const auto ref = extract_visual(base, w, cfg);
    int lo[2] = {99, 99}, hi[2] = {-99, -99};
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) {
            Tensor probe = base;
            probe.at(y, x, 1) += 0.25f;
            const auto out = extract_visual(probe, w, cfg);
            for (int s = 0; s < 2; ++s)
                if (out[s].values.at(c, c, 0) != ref[s].values.at(c, c, 0)) {
                    lo[s] = std::min(lo[s], static_cast<int>(x) - static_cast<int>(c));
                    hi[s] = std::max(hi[s], static_cast<int>(x) - static_cast<int>(c));
                }
        }
    // 3x3 block, then 5x5-span dilated blocks: 3 + 4 per scale.
    CHECK(hi[0] - lo[0] + 1 == 7);
    CHECK(hi[1] - lo[1] + 1 == 11);
    CHECK(lo[1] == -5);
}

TEST_CASE("visual features are translation equivariant away from the border") {
    const LltConfig cfg = LltConfig::derived(3, 4, 2, 8);
    const ModelWeights w = init_weights(5, cfg);
    std::mt19937_64 rng(5);
    const Tensor img = fixtures::random_tensor({32, 32, 3}, rng, 0.0f, 1.0f);
    Tensor shifted({32, 32, 3});
    const std::size_t dy = 3, dx = 2;
    for (std::size_t y = dy; y < 32; ++y)
        for (std::size_t x = dx; x < 32; ++x)
            for (std::size_t k = 0; k < 3; ++k) shifted.at(y, x, k) = img.at(y - dy, x - dx, k);
    const auto a = extract_visual(img, w, cfg).back();
    const auto b = extract_visual(shifted, w, cfg).back();
    for (std::size_t y = 6; y + 6 < 32 - dy; ++y)
        for (std::size_t x = 6; x + 6 < 32 - dx; ++x)
            for (std::size_t k = 0; k < 8; ++k)
                CHECK(b.values.at(y + dy, x + dx, k) == doctest::Approx(a.values.at(y, x, k)).epsilon(1e-5));
}

TEST_CASE("grid view is a pure reinterpretation") {
    std::mt19937_64 rng(6);
    const Tensor flat = fixtures::random_tensor({2, 3, 12}, rng);
    const BilateralGrid g = BilateralGrid::from_features(flat, 4);
    CHECK(g.values.shape() == Shape{2, 3, 3, 4});
    CHECK(g.flattened() == flat);
    for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 0; x < 3; ++x)
            for (std::size_t c = 0; c < 3; ++c)
                for (std::size_t z = 0; z < 4; ++z) CHECK(g.at(y, x, c, z) == flat[(y * 3 + x) * 12 + c * 4 + z]);
    CHECK_THROWS_AS(BilateralGrid::from_features(flat, 5), Error);
}

TEST_CASE("guidance of a constant depth map is constant in the interior") {
    const ModelWeights w = init_weights(7, LltConfig{});
    const GuidanceMap g = extract_guidance(Tensor({24, 24, 1}, 0.4f), w);
    const float center = g.at(12, 12);
    for (std::size_t y = 2; y < 22; ++y)
        for (std::size_t x = 2; x < 22; ++x) CHECK(g.at(y, x) == doctest::Approx(center).epsilon(1e-6));
}

TEST_CASE("input contracts") {
    const LltConfig cfg = LltConfig::derived(3, 4, 1, 8);
    const ModelWeights w = init_weights(8, cfg);
    CHECK_THROWS_AS(extract_geometric(Tensor({20, 16, 1}, 0.5f), w, cfg), Error);
    CHECK_THROWS_AS(extract_visual(Tensor({16, 16, 4}), w, cfg), Error);
    ModelWeights missing = w;
    missing.erase("visual.dil1.norm_scale");
    CHECK_THROWS_WITH_AS(extract_visual(Tensor({16, 16, 3}), missing, cfg), doctest::Contains("visual.dil1.norm_scale"),
                         Error);
}

TEST_CASE("init_weights") {
    const LltConfig cfg = LltConfig::derived(3, 4, 2, 8);
    const ModelWeights a = init_weights(9, cfg), b = init_weights(9, cfg), c = init_weights(10, cfg);
    CHECK(a == b);
    CHECK(a != c);
    CHECK_NOTHROW(check_complete(a, cfg));
    for (const auto& layer : layer_inventory(cfg)) {
        const float bound = std::sqrt(6.0f / static_cast<float>(layer.in_channels * 9));
        for (float v : a.at(layer.name + ".kernel").values()) CHECK(std::abs(v) <= bound);
        CHECK(a.count(layer.name + ".norm_scale") == (layer.normalized ? 1u : 0u));
    }
}
