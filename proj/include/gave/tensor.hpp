#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace gave {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major float tensor. Images and feature maps are stored as
/// [H, W, C]; convolution kernels as [out, in, K, K].
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, float fill = 0.0f);
    Tensor(Shape shape, std::vector<float> data);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<float> values() noexcept { return data_; }
    std::span<const float> values() const noexcept { return data_; }
    float* data() noexcept { return data_.data(); }
    const float* data() const noexcept { return data_.data(); }

    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }

    // [H, W, C] accessors.
    float& at(std::size_t y, std::size_t x, std::size_t c) {
        return data_[(y * shape_[1] + x) * shape_[2] + c];
    }
    float at(std::size_t y, std::size_t x, std::size_t c) const {
        return data_[(y * shape_[1] + x) * shape_[2] + c];
    }

    /// Same values, new extents. Throws if the element counts differ.
    Tensor reshaped(Shape shape) const&;
    Tensor reshaped(Shape shape) &&;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<float> data_;
};

struct ConvParams {
    Tensor kernel;  // [out_ch, in_ch, K, K]
    Tensor bias;    // [out_ch]
    int stride = 1;
    int dilation = 1;
    Tensor norm_scale;  // [out_ch]; unused by plain conv2d
    Tensor norm_shift;  // [out_ch]

    std::size_t out_channels() const { return kernel.dim(0); }
    std::size_t in_channels() const { return kernel.dim(1); }
    std::size_t kernel_size() const { return kernel.dim(2); }
};

/// Zero-padded "same" convolution over an [H, W, Cin] tensor. Output is
/// [ceil(H/S), ceil(W/S), Cout].
Tensor conv2d(const Tensor& input, const ConvParams& p);

/// conv2d, then per-channel affine normalization, then max(0, .).
Tensor conv_block(const Tensor& input, const ConvParams& p);

/// Elementwise logistic function, clamped so every output is strictly
/// inside (0, 1) even where float evaluation would saturate.
Tensor sigmoid(const Tensor& input);
float sigmoid(float x);

}  // namespace gave
