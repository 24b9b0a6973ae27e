#include "gave/weights.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "gave/error.hpp"

namespace gave {

std::vector<LayerSpec> layer_inventory(const LltConfig& cfg) {
    cfg.validate();
    const std::size_t dc = cfg.d_c, dd = cfg.d_d;
    std::vector<LayerSpec> layers{
        {"visual.block0", dc, 3, 3, 1, 1, true},
    };
    for (std::size_t i = 1; i <= cfg.n_scales; ++i)
        layers.push_back({"visual.dil" + std::to_string(i), dc, dc, 3, 1, 2, true});
    layers.push_back({"geo.down0", 32, 1, 3, 2, 1, true});
    layers.push_back({"geo.down1", 256, 32, 3, 2, 1, true});
    layers.push_back({"geo.down2", dd, 256, 3, 2, 1, false});
    for (std::size_t i = 1; i <= cfg.n_scales; ++i)
        layers.push_back({"geo.scale" + std::to_string(i), dd, dd, 3, 1, 1, true});
    layers.push_back({"guide.block0", 3, 1, 3, 1, 1, true});
    layers.push_back({"guide.conv1", 1, 3, 3, 1, 1, false});
    return layers;
}

namespace {

const Tensor& require(const ModelWeights& w, const std::string& name, const Shape& shape) {
    auto it = w.find(name);
    if (it == w.end()) throw Error(ErrorKind::MissingWeights, "layer tensor '" + name + "' is absent");
    if (it->second.shape() != shape)
        throw Error(ErrorKind::MissingWeights, "layer tensor '" + name + "' has shape " +
                                                   shape_string(it->second.shape()) + ", expected " +
                                                   shape_string(shape));
    return it->second;
}

}  // namespace

ConvParams layer_params(const ModelWeights& weights, const LayerSpec& layer) {
    ConvParams p;
    p.kernel = require(weights, layer.name + ".kernel",
                       {layer.out_channels, layer.in_channels, layer.kernel_size, layer.kernel_size});
    p.bias = require(weights, layer.name + ".bias", {layer.out_channels});
    if (layer.normalized) {
        p.norm_scale = require(weights, layer.name + ".norm_scale", {layer.out_channels});
        p.norm_shift = require(weights, layer.name + ".norm_shift", {layer.out_channels});
    }
    p.stride = layer.stride;
    p.dilation = layer.dilation;
    return p;
}

ConvParams layer_params(const ModelWeights& weights, const LltConfig& cfg, const std::string& name) {
    for (const auto& layer : layer_inventory(cfg))
        if (layer.name == name) return layer_params(weights, layer);
    throw Error(ErrorKind::MissingWeights, "no layer named '" + name + "' in this configuration");
}

void check_complete(const ModelWeights& weights, const LltConfig& cfg) {
    for (const auto& layer : layer_inventory(cfg)) layer_params(weights, layer);
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

class Reader {
public:
    Reader(const std::string& bytes, const std::string& path) : bytes_(bytes), path_(path) {}

    bool done() const { return pos_ == bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::string raw(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw Error(ErrorKind::Format, "truncated weights file " + path_);
    }

    const std::string& bytes_;
    const std::string& path_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_weights(const ModelWeights& weights, const std::string& path) {
    std::string out(kWeightsMagic, 4);
    put_u32(out, kWeightsVersion);
    for (const auto& [name, tensor] : weights) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        put_u32(out, static_cast<std::uint32_t>(tensor.rank()));
        for (auto extent : tensor.shape()) put_u32(out, static_cast<std::uint32_t>(extent));
        for (float v : tensor.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorKind::Io, "cannot write weights file " + path);
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw Error(ErrorKind::Io, "failed writing weights file " + path);
}

ModelWeights load_weights(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorKind::Io, "cannot open weights file " + path);
    const std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

    Reader in(bytes, path);
    if (in.raw(4) != std::string(kWeightsMagic, 4)) throw Error(ErrorKind::Format, "bad magic in " + path);
    if (const auto version = in.u32(); version != kWeightsVersion)
        throw Error(ErrorKind::Format, "unsupported weights version " + std::to_string(version));

    ModelWeights weights;
    while (!in.done()) {
        const std::string name = in.raw(in.u32());
        const std::uint32_t rank = in.u32();
        if (rank == 0 || rank > 8) throw Error(ErrorKind::Format, "tensor '" + name + "' has bad rank");
        Shape shape(rank);
        for (auto& extent : shape) {
            extent = in.u32();
            if (extent == 0) throw Error(ErrorKind::Format, "tensor '" + name + "' has a zero extent");
        }
        const std::size_t count = element_count(shape);
        if (count > in.remaining() / 4) throw Error(ErrorKind::Format, "truncated weights file " + path);
        std::vector<float> data(count);
        for (float& v : data) v = std::bit_cast<float>(in.u32());
        if (!weights.emplace(name, Tensor(std::move(shape), std::move(data))).second)
            throw Error(ErrorKind::Format, "duplicate tensor name '" + name + "' in " + path);
    }
    return weights;
}

ModelWeights load_weights(const std::string& path, const LltConfig& cfg) {
    ModelWeights w = load_weights(path);
    check_complete(w, cfg);
    return w;
}

}  // namespace gave
