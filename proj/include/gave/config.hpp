#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>

namespace gave {

/// Extractor and fusion hyperparameters.
///
/// The geometric branch must emit exactly as many coefficients per grid
/// cell as one pixel's group-wise transform needs, so
/// d_d / n_grid == d_c * (d_c / n_group) for every legal configuration.
struct LltConfig {
    std::size_t d_c = 64;      // visual channels
    std::size_t d_d = 768;     // geometric channels
    std::size_t n_grid = 3;    // bilateral grid depth
    std::size_t n_group = 16;  // group count in the local linear transform
    std::size_t n_scales = 2;  // fused scales, 1..3
    std::size_t k = 400;       // correspondences kept

    /// A configuration with d_d derived from the element-count identity.
    static LltConfig derived(std::size_t n_grid, std::size_t n_group, std::size_t n_scales, std::size_t d_c = 64);

    std::size_t group_size() const { return d_c / n_group; }
    std::size_t grid_channels() const { return d_d / n_grid; }

    void validate() const;
    friend bool operator==(const LltConfig&, const LltConfig&) = default;
};

struct JbfParams {
    int window_radius = 5;
    double sigma_spatial = 3.0;  // pixels
    double sigma_range = 0.1;    // RGB distance, channels in [0,1]
    int max_iterations = 8;

    void validate() const;
};

/// depth (m) -> sigmoid(scale * depth + offset)
struct DepthNormalization {
    double scale = 0.5;
    double offset = -1.5;
};

struct MatchParams {
    std::size_t max_ref_points = 5000;
};

struct AlignParams {
    std::size_t n_hypotheses = 128;
    std::size_t subset_size = 10;
    double inlier_tau = 0.05;  // meters
    std::uint64_t seed = 0;
};

struct LossWeights {
    double photometric = 1.0;
    double depth = 1.0;
    double correspondence = 1.0;
};

struct PipelineConfig {
    LltConfig llt;
    JbfParams jbf;
    DepthNormalization normalization;
    MatchParams match;
    AlignParams align;
    LossWeights loss;
    // Once d_d is set explicitly it is no longer re-derived from n_grid/n_group/d_c.
    bool d_d_pinned = false;

    /// Applies one `key=value` setting; unknown keys and malformed values throw.
    void set(const std::string& key, const std::string& value);
    /// Reads a key-value text file (`#` comments, blank lines ignored).
    static PipelineConfig load(const std::string& path);
    static PipelineConfig parse(const std::string& text);
    std::map<std::string, std::string> to_map() const;
    void validate() const;
};

}  // namespace gave
