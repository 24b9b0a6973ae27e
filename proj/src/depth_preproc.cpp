#include "gave/depth_preproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gave/error.hpp"

namespace gave {

RgbdFrame fill_holes_jbf(const RgbdFrame& frame, const JbfParams& params, FillReport* report) {
    params.validate();
    FillReport local;
    FillReport& rep = report ? *report : local;
    rep = {};
    if (frame.valid_count() == 0) throw Error(ErrorKind::Empty, "cannot fill holes: frame has no valid depth");

    RgbdFrame out = frame;
    const int h = static_cast<int>(frame.height), w = static_cast<int>(frame.width);
    const int r = params.window_radius;
    const double inv_s = 1.0 / (2.0 * params.sigma_spatial * params.sigma_spatial);
    const double inv_r = 1.0 / (2.0 * params.sigma_range * params.sigma_range);

    std::vector<float> spatial((2 * r + 1) * (2 * r + 1));
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            spatial[(dy + r) * (2 * r + 1) + dx + r] = static_cast<float>(std::exp(-(dx * dx + dy * dy) * inv_s));

    for (int iter = 0; iter < params.max_iterations; ++iter) {
        const std::vector<float> depth = out.depth;
        const std::vector<std::uint8_t> valid = out.valid;
        std::size_t filled = 0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = out.index(y, x);
                if (valid[i]) continue;
                const float* c0 = frame.rgb_at(y, x);
                double sum = 0, wsum = 0;
                bool any = false;
                for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy) {
                    for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
                        const std::size_t j = out.index(yy, xx);
                        if (!valid[j]) continue;
                        const float* c1 = frame.rgb_at(yy, xx);
                        const double dr = c0[0] - c1[0], dg = c0[1] - c1[1], db = c0[2] - c1[2];
                        const double wgt =
                            spatial[(yy - y + r) * (2 * r + 1) + xx - x + r] * std::exp(-(dr * dr + dg * dg + db * db) * inv_r);
                        sum += wgt * depth[j];
                        wsum += wgt;
                        any = true;
                    }
                }
                if (!any) continue;
                float value;
                if (wsum > 0) {
                    value = static_cast<float>(sum / wsum);
                } else {
                    // Every range weight underflowed; fall back to the nearest valid neighbor.
                    int best = std::numeric_limits<int>::max();
                    value = 0;
                    for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy)
                        for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
                            const int d2 = (yy - y) * (yy - y) + (xx - x) * (xx - x);
                            if (valid[out.index(yy, xx)] && d2 < best) best = d2, value = depth[out.index(yy, xx)];
                        }
                }
                if (!(value > 0)) continue;
                out.depth[i] = value;
                out.valid[i] = 1;
                ++filled;
            }
        }
        if (filled == 0) break;
        rep.iterations = iter + 1;
        rep.filled_by_filter += filled;
    }

    if (out.valid_count() < out.pixel_count()) {
        std::vector<float> samples;
        for (std::size_t i = 0; i < frame.pixel_count(); ++i)
            if (frame.valid[i]) samples.push_back(frame.depth[i]);
        const auto mid = samples.begin() + samples.size() / 2;
        std::nth_element(samples.begin(), mid, samples.end());
        rep.median_depth = *mid;
        for (std::size_t i = 0; i < out.pixel_count(); ++i) {
            if (out.valid[i]) continue;
            out.depth[i] = rep.median_depth;
            out.valid[i] = 1;
            ++rep.filled_by_median;
        }
    }
    return out;
}

float normalize_depth_value(float depth, const DepthNormalization& norm) {
    const double s = 1.0 / (1.0 + std::exp(-(norm.scale * depth + norm.offset)));
    return std::clamp(static_cast<float>(s), 0.0f, std::nextafter(1.0f, 0.0f));
}

Tensor normalize_depth(const RgbdFrame& filled, const DepthNormalization& norm) {
    if (filled.valid_count() != filled.pixel_count())
        throw Error(ErrorKind::InvalidArgument, "normalize_depth expects a hole-free depth map");
    Tensor out({filled.height, filled.width, 1});
    for (std::size_t i = 0; i < filled.pixel_count(); ++i) out[i] = normalize_depth_value(filled.depth[i], norm);
    return out;
}

}  // namespace gave
