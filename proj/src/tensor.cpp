#include "gave/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "gave/error.hpp"

namespace gave {

std::size_t element_count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
    for (auto extent : shape_)
        if (extent == 0) throw Error(ErrorKind::ShapeMismatch, "zero extent in " + shape_string(shape_));
    data_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != element_count(shape_))
        throw Error(ErrorKind::ShapeMismatch, "data length " + std::to_string(data_.size()) +
                                                  " does not match shape " + shape_string(shape_));
}

Tensor Tensor::reshaped(Shape shape) const& {
    return Tensor(*this).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
    if (element_count(shape) != data_.size())
        throw Error(ErrorKind::ShapeMismatch,
                    "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    shape_ = std::move(shape);
    return std::move(*this);
}

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_conv(const Tensor& input, const ConvParams& p) {
    if (input.rank() != 3)
        throw Error(ErrorKind::ShapeMismatch, "conv input must be [H,W,C], got " + shape_string(input.shape()));
    if (p.kernel.rank() != 4 || p.kernel.dim(2) != p.kernel.dim(3))
        throw Error(ErrorKind::ShapeMismatch,
                    "kernel must be [out,in,K,K], got " + shape_string(p.kernel.shape()));
    if (p.kernel.dim(2) % 2 == 0)
        throw Error(ErrorKind::ShapeMismatch, "kernel axis 2 (K) must be odd");
    if (p.kernel.dim(1) != input.dim(2))
        throw Error(ErrorKind::ShapeMismatch, "channel axis: input has " + std::to_string(input.dim(2)) +
                                                  " channels, kernel expects " + std::to_string(p.kernel.dim(1)));
    if (p.bias.size() != p.kernel.dim(0))
        throw Error(ErrorKind::ShapeMismatch, "bias axis 0: expected " + std::to_string(p.kernel.dim(0)) +
                                                  ", got " + std::to_string(p.bias.size()));
    if (p.stride < 1 || p.dilation < 1)
        throw Error(ErrorKind::InvalidArgument, "stride and dilation must be positive");
}

// Output rows are produced in bands so the im2col buffer stays bounded.
constexpr std::size_t kColumnBudget = std::size_t{1} << 23;

}  // namespace

Tensor conv2d(const Tensor& input, const ConvParams& p) {
    check_conv(input, p);
    const std::ptrdiff_t height = input.dim(0), width = input.dim(1);
    const std::ptrdiff_t in_ch = input.dim(2);
    const std::ptrdiff_t out_ch = p.kernel.dim(0);
    const std::ptrdiff_t ksize = p.kernel.dim(2);
    const std::ptrdiff_t stride = p.stride, dil = p.dilation;
    const std::ptrdiff_t pad = (ksize - 1) * dil / 2;
    const std::ptrdiff_t out_h = (height + stride - 1) / stride;
    const std::ptrdiff_t out_w = (width + stride - 1) / stride;
    const std::ptrdiff_t patch = ksize * ksize * in_ch;

    // Repack [out,in,u,v] into a [(u,v,in), out] matrix matching the patch order.
    RowMatrix weights(patch, out_ch);
    for (std::ptrdiff_t o = 0; o < out_ch; ++o)
        for (std::ptrdiff_t i = 0; i < in_ch; ++i)
            for (std::ptrdiff_t u = 0; u < ksize; ++u)
                for (std::ptrdiff_t v = 0; v < ksize; ++v)
                    weights((u * ksize + v) * in_ch + i, o) = p.kernel[((o * in_ch + i) * ksize + u) * ksize + v];
    const Eigen::Map<const Eigen::RowVectorXf> bias(p.bias.data(), out_ch);

    Tensor output({static_cast<std::size_t>(out_h), static_cast<std::size_t>(out_w),
                   static_cast<std::size_t>(out_ch)});
    const std::ptrdiff_t band =
        std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(kColumnBudget) / std::max<std::ptrdiff_t>(1, patch * out_w), 1, out_h);
    RowMatrix columns;
    for (std::ptrdiff_t y0 = 0; y0 < out_h; y0 += band) {
        const std::ptrdiff_t rows = std::min(band, out_h - y0);
        columns.setZero(rows * out_w, patch);
        for (std::ptrdiff_t r = 0; r < rows; ++r) {
            const std::ptrdiff_t y = y0 + r;
            for (std::ptrdiff_t x = 0; x < out_w; ++x) {
                float* col = columns.row(r * out_w + x).data();
                for (std::ptrdiff_t u = 0; u < ksize; ++u) {
                    const std::ptrdiff_t sy = y * stride + u * dil - pad;
                    if (sy < 0 || sy >= height) continue;
                    for (std::ptrdiff_t v = 0; v < ksize; ++v) {
                        const std::ptrdiff_t sx = x * stride + v * dil - pad;
                        if (sx < 0 || sx >= width) continue;
                        const float* src = input.data() + (sy * width + sx) * in_ch;
                        std::copy(src, src + in_ch, col + (u * ksize + v) * in_ch);
                    }
                }
            }
        }
        Eigen::Map<RowMatrix> out(output.data() + y0 * out_w * out_ch, rows * out_w, out_ch);
        out.noalias() = columns * weights;
        out.rowwise() += bias;
    }
    return output;
}

Tensor conv_block(const Tensor& input, const ConvParams& p) {
    Tensor out = conv2d(input, p);
    const std::size_t channels = out.dim(2);
    if (p.norm_scale.size() != channels || p.norm_shift.size() != channels)
        throw Error(ErrorKind::ShapeMismatch, "norm_scale/norm_shift axis 0: expected " + std::to_string(channels));
    float* values = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::size_t c = i % channels;
        values[i] = std::max(0.0f, values[i] * p.norm_scale[c] + p.norm_shift[c]);
    }
    return out;
}

float sigmoid(float x) {
    constexpr float lo = std::numeric_limits<float>::min();
    const float hi = std::nextafter(1.0f, 0.0f);
    const double s = 1.0 / (1.0 + std::exp(-static_cast<double>(x)));
    return std::clamp(static_cast<float>(s), lo, hi);
}

Tensor sigmoid(const Tensor& input) {
    Tensor out = input;
    for (float& v : out.values()) v = sigmoid(v);
    return out;
}

}  // namespace gave
