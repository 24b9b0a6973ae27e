#include "gave/llt.hpp"

#include <algorithm>
#include <cmath>

#include "gave/depth_preproc.hpp"
#include "gave/error.hpp"

namespace gave {

SlicedCoefficients SlicedCoefficients::from_flat(Tensor flat, std::size_t n_group) {
    if (flat.rank() != 3 || n_group == 0 || flat.dim(2) % n_group != 0)
        throw Error(ErrorKind::ShapeMismatch, "coefficients " + shape_string(flat.shape()) +
                                                  " cannot be split into " + std::to_string(n_group) + " groups");
    const std::size_t per_group = flat.dim(2) / n_group;  // m * m
    const auto m = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(per_group))));
    if (m * m != per_group)
        throw Error(ErrorKind::ShapeMismatch, "per-group coefficient count " + std::to_string(per_group) +
                                                  " is not a square");
    return {std::move(flat), n_group, m};
}

Tensor slice(const BilateralGrid& grid, const GuidanceMap& guidance) {
    const std::size_t h = guidance.height(), w = guidance.width();
    const std::size_t gh = grid.height(), gw = grid.width();
    if (gh != h / 8 || gw != w / 8 || h % 8 != 0 || w % 8 != 0)
        throw Error(ErrorKind::ShapeMismatch, "grid " + std::to_string(gh) + "x" + std::to_string(gw) +
                                                  " does not match guidance " + std::to_string(h) + "x" +
                                                  std::to_string(w) + " / 8");
    const std::size_t channels = grid.channels(), depth = grid.depth();
    Tensor out({h, w, channels});

    auto clamp_index = [](long i, std::size_t n) {
        return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(n) - 1));
    };

    for (std::size_t y = 0; y < h; ++y) {
        const double gy = (static_cast<double>(y) + 0.5) / 8.0 - 0.5;
        const long y0 = static_cast<long>(std::floor(gy));
        const float fy = static_cast<float>(gy - y0);
        const std::size_t ys[2] = {clamp_index(y0, gh), clamp_index(y0 + 1, gh)};
        for (std::size_t x = 0; x < w; ++x) {
            const double gx = (static_cast<double>(x) + 0.5) / 8.0 - 0.5;
            const long x0 = static_cast<long>(std::floor(gx));
            const float fx = static_cast<float>(gx - x0);
            const std::size_t xs[2] = {clamp_index(x0, gw), clamp_index(x0 + 1, gw)};

            const double gz = static_cast<double>(guidance.at(y, x)) * static_cast<double>(depth) - 0.5;
            const long z0 = static_cast<long>(std::floor(gz));
            const float fz = static_cast<float>(gz - z0);
            const std::size_t zs[2] = {clamp_index(z0, depth), clamp_index(z0 + 1, depth)};

            // Nested linear interpolation (depth, then x, then y); a
            // constant neighborhood reproduces its value exactly.
            float* dst = out.data() + (y * w + x) * channels;
            const float* c00 = grid.cell(ys[0], xs[0]);
            const float* c01 = grid.cell(ys[0], xs[1]);
            const float* c10 = grid.cell(ys[1], xs[0]);
            const float* c11 = grid.cell(ys[1], xs[1]);
            auto lerp = [](float a, float b, float t) { return a + t * (b - a); };
            for (std::size_t k = 0; k < channels; ++k) {
                const std::size_t lo = k * depth + zs[0], hi = k * depth + zs[1];
                const float v00 = lerp(c00[lo], c00[hi], fz), v01 = lerp(c01[lo], c01[hi], fz);
                const float v10 = lerp(c10[lo], c10[hi], fz), v11 = lerp(c11[lo], c11[hi], fz);
                dst[k] = lerp(lerp(v00, v01, fx), lerp(v10, v11, fx), fy);
            }
        }
    }
    return out;
}

SlicedCoefficients slice(const BilateralGrid& grid, const GuidanceMap& guidance, const LltConfig& cfg) {
    cfg.validate();
    if (grid.channels() != cfg.grid_channels() || grid.depth() != cfg.n_grid)
        throw Error(ErrorKind::ShapeMismatch, "grid shape " + shape_string(grid.values.shape()) +
                                                  " does not match the configuration");
    return SlicedCoefficients::from_flat(slice(grid, guidance), cfg.n_group);
}

FeatureMap apply_llt(const SlicedCoefficients& coeffs, const FeatureMap& visual) {
    const Tensor& v = visual.values;
    if (v.rank() != 3 || v.dim(0) != coeffs.height() || v.dim(1) != coeffs.width())
        throw Error(ErrorKind::ShapeMismatch, "visual features " + shape_string(v.shape()) +
                                                  " do not match coefficients " + shape_string(coeffs.flat.shape()));
    const std::size_t channels = v.dim(2), m = coeffs.group_size, groups = coeffs.n_group;
    if (channels != coeffs.channels())
        throw Error(ErrorKind::ShapeMismatch, "group size mismatch: " + std::to_string(channels) + " channels vs " +
                                                  std::to_string(groups) + " groups of " + std::to_string(m));

    FeatureMap out{Tensor(v.shape()), visual.scale_index};
    const std::size_t pixels = v.dim(0) * v.dim(1);
    const std::size_t stride = coeffs.flat.dim(2);
    for (std::size_t p = 0; p < pixels; ++p) {
        const float* a = coeffs.flat.data() + p * stride;
        const float* in = v.data() + p * channels;
        float* dst = out.values.data() + p * channels;
        for (std::size_t g = 0; g < groups; ++g) {
            const float* block = a + g * m * m;
            const float* vin = in + g * m;
            for (std::size_t r = 0; r < m; ++r) {
                float acc = 0.0f;
                for (std::size_t c = 0; c < m; ++c) acc += block[r * m + c] * vin[c];
                dst[g * m + r] = acc;
            }
        }
    }
    return out;
}

FeatureMap fuse_multiscale(const std::vector<FeatureMap>& maps) {
    if (maps.empty()) throw Error(ErrorKind::Empty, "fuse_multiscale needs at least one map");
    if (maps.size() == 1) return maps.front();
    const Shape& shape = maps.front().values.shape();
    for (const auto& m : maps)
        if (m.values.shape() != shape)
            throw Error(ErrorKind::ShapeMismatch, "cannot fuse " + shape_string(m.values.shape()) + " with " +
                                                      shape_string(shape));
    FeatureMap out{Tensor(shape), 0};
    const float inv = 1.0f / static_cast<float>(maps.size());
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        float sum = 0.0f;
        for (const auto& m : maps) sum += m.values[i];
        out.values[i] = sum * inv;
    }
    return out;
}

Tensor rgb_tensor(const RgbdFrame& frame) {
    return Tensor({frame.height, frame.width, 3}, frame.rgb);
}

FeatureMap extract_features(const RgbdFrame& frame, const ModelWeights& weights, const PipelineConfig& cfg) {
    cfg.llt.validate();
    frame.validate();
    const RgbdFrame filled = fill_holes_jbf(frame, cfg.jbf);
    const Tensor depth = normalize_depth(filled, cfg.normalization);

    const auto visual = extract_visual(rgb_tensor(frame), weights, cfg.llt);
    const auto grids = extract_geometric(depth, weights, cfg.llt);
    const GuidanceMap guidance = extract_guidance(depth, weights);

    std::vector<FeatureMap> fused;
    fused.reserve(visual.size());
    for (std::size_t i = 0; i < visual.size(); ++i)
        fused.push_back(apply_llt(slice(grids[i], guidance, cfg.llt), visual[i]));
    return fuse_multiscale(fused);
}

}  // namespace gave
