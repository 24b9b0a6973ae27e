#include "gave/extractors.hpp"

#include <cmath>
#include <random>

#include "gave/error.hpp"

namespace gave {

BilateralGrid BilateralGrid::from_features(Tensor features, std::size_t n_grid, int scale_index) {
    if (features.rank() != 3 || n_grid == 0 || features.dim(2) % n_grid != 0)
        throw Error(ErrorKind::ShapeMismatch, "cannot view " + shape_string(features.shape()) +
                                                  " as a grid of depth " + std::to_string(n_grid));
    const Shape shape{features.dim(0), features.dim(1), features.dim(2) / n_grid, n_grid};
    return {std::move(features).reshaped(shape), scale_index};
}

Tensor BilateralGrid::flattened() const {
    return values.reshaped({height(), width(), channels() * depth()});
}

namespace {

const LayerSpec& find_layer(const std::vector<LayerSpec>& layers, const std::string& name) {
    for (const auto& l : layers)
        if (l.name == name) return l;
    throw Error(ErrorKind::MissingWeights, "no layer named '" + name + "'");
}

Tensor run_layer(const Tensor& input, const ModelWeights& weights, const LayerSpec& layer) {
    const ConvParams p = layer_params(weights, layer);
    return layer.normalized ? conv_block(input, p) : conv2d(input, p);
}

void require_hw(const Tensor& t, std::size_t channels, const char* what) {
    if (t.rank() != 3 || t.dim(2) != channels)
        throw Error(ErrorKind::ShapeMismatch, std::string(what) + " must be [H,W," + std::to_string(channels) +
                                                  "], got " + shape_string(t.shape()));
}

}  // namespace

std::vector<FeatureMap> extract_visual(const Tensor& rgb, const ModelWeights& weights, const LltConfig& cfg) {
    require_hw(rgb, 3, "visual input");
    const auto layers = layer_inventory(cfg);
    Tensor v = run_layer(rgb, weights, find_layer(layers, "visual.block0"));
    std::vector<FeatureMap> maps;
    for (std::size_t i = 1; i <= cfg.n_scales; ++i) {
        v = run_layer(v, weights, find_layer(layers, "visual.dil" + std::to_string(i)));
        maps.push_back({v, static_cast<int>(i)});
    }
    return maps;
}

std::vector<BilateralGrid> extract_geometric(const Tensor& normalized_depth, const ModelWeights& weights,
                                             const LltConfig& cfg) {
    require_hw(normalized_depth, 1, "geometric input");
    if (normalized_depth.dim(0) % 8 != 0 || normalized_depth.dim(1) % 8 != 0)
        throw Error(ErrorKind::ShapeMismatch, "depth extents " + shape_string(normalized_depth.shape()) +
                                                  " are not divisible by 8");
    const auto layers = layer_inventory(cfg);
    Tensor b = normalized_depth;
    for (const char* name : {"geo.down0", "geo.down1", "geo.down2"}) b = run_layer(b, weights, find_layer(layers, name));

    std::vector<BilateralGrid> grids;
    for (std::size_t i = 1; i <= cfg.n_scales; ++i) {
        b = run_layer(b, weights, find_layer(layers, "geo.scale" + std::to_string(i)));
        grids.push_back(BilateralGrid::from_features(b, cfg.n_grid, static_cast<int>(i)));
    }
    return grids;
}

GuidanceMap extract_guidance(const Tensor& normalized_depth, const ModelWeights& weights) {
    require_hw(normalized_depth, 1, "guidance input");
    const auto layers = layer_inventory(LltConfig{});
    Tensor g = run_layer(normalized_depth, weights, find_layer(layers, "guide.block0"));
    g = run_layer(g, weights, find_layer(layers, "guide.conv1"));
    return {sigmoid(g)};
}

ModelWeights init_weights(std::uint64_t seed, const LltConfig& cfg) {
    std::mt19937_64 rng(seed);
    ModelWeights w;
    for (const auto& layer : layer_inventory(cfg)) {
        const std::size_t fan_in = layer.in_channels * layer.kernel_size * layer.kernel_size;
        const float bound = static_cast<float>(std::sqrt(6.0 / static_cast<double>(fan_in)));
        std::uniform_real_distribution<float> dist(-bound, bound);
        Tensor kernel({layer.out_channels, layer.in_channels, layer.kernel_size, layer.kernel_size});
        for (float& v : kernel.values()) v = dist(rng);
        w.emplace(layer.name + ".kernel", std::move(kernel));
        w.emplace(layer.name + ".bias", Tensor({layer.out_channels}, 0.0f));
        if (layer.normalized) {
            w.emplace(layer.name + ".norm_scale", Tensor({layer.out_channels}, 1.0f));
            w.emplace(layer.name + ".norm_shift", Tensor({layer.out_channels}, 0.0f));
        }
    }
    return w;
}

}  // namespace gave
