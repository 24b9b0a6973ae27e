#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gave/config.hpp"
#include "gave/tensor.hpp"

namespace gave {

/// Named tensors for every convolution layer of the extractors. Layer
/// `name` owns `name.kernel` and `name.bias`; normalized blocks also own
/// `name.norm_scale` and `name.norm_shift`.
using ModelWeights = std::map<std::string, Tensor>;

struct LayerSpec {
    std::string name;
    std::size_t out_channels;
    std::size_t in_channels;
    std::size_t kernel_size;
    int stride;
    int dilation;
    bool normalized;  // ConvBlock (conv + affine norm + rectifier) vs plain Conv
};

/// The full layer inventory for a configuration, in network order.
std::vector<LayerSpec> layer_inventory(const LltConfig& cfg);

/// Throws Error(MissingWeights) naming the first absent or mis-shaped tensor.
void check_complete(const ModelWeights& weights, const LltConfig& cfg);

/// Assembles the ConvParams of one layer, validating every tensor shape.
ConvParams layer_params(const ModelWeights& weights, const LayerSpec& layer);
ConvParams layer_params(const ModelWeights& weights, const LltConfig& cfg, const std::string& name);

inline constexpr char kWeightsMagic[4] = {'L', 'L', 'T', 'W'};
inline constexpr std::uint32_t kWeightsVersion = 1;

/// Binary layout, integers u32 and reals f32, all little-endian:
///   "LLTW", version, then records up to EOF of
///   (name_len, name bytes, rank, extents..., payload).
void save_weights(const ModelWeights& weights, const std::string& path);
ModelWeights load_weights(const std::string& path);
/// As above, then rejects files whose inventory is incomplete for `cfg`.
ModelWeights load_weights(const std::string& path, const LltConfig& cfg);

}  // namespace gave
