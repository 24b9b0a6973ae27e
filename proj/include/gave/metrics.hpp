#pragma once

#include <span>
#include <vector>

#include "gave/correspondence.hpp"
#include "gave/pose.hpp"
#include "gave/rgbd.hpp"

namespace gave {

/// Geodesic angle between two rotations, in degrees: the angle of
/// truth^T * estimate.
double rotation_error(const Mat3& estimate, const Mat3& truth);
/// Euclidean translation difference, in millimeters (inputs in meters).
double translation_error(const Vec3& estimate, const Vec3& truth);

/// Symmetric mean nearest-neighbor distance, in centimeters:
/// (mean_a min_b |a-b| + mean_b min_a |b-a|) / 2 * 100.
double chamfer_distance(std::span<const Vec3> a, std::span<const Vec3> b);

/// Exact nearest-neighbor queries over a uniform hash grid. Rings of cells
/// around the query are searched outward until no unvisited cell can hold
/// a closer point.
class NearestNeighborGrid {
public:
    explicit NearestNeighborGrid(std::span<const Vec3> points);
    /// Squared distance to the nearest stored point.
    double nearest_squared(const Vec3& q) const;

private:
    struct Cell {
        long x, y, z;
    };
    Cell cell_of(const Vec3& p) const;
    std::size_t bucket(long x, long y, long z) const;

    std::vector<Vec3> points_;
    Vec3 origin_;
    double cell_ = 1.0;
    Cell extent_{};  // number of cells per axis
    std::vector<std::size_t> bucket_start_;
    std::vector<std::size_t> order_;
};

/// Fraction of errors strictly below each threshold.
std::vector<double> accuracy_table(std::span<const double> errors, std::span<const double> thresholds);

/// Preset thresholds in the units the error functions return.
struct AccuracyPresets {
    static constexpr double rotation_deg[3] = {5.0, 10.0, 45.0};
    static constexpr double translation_mm[3] = {50.0, 100.0, 250.0};  // 5, 10, 25 cm
    static constexpr double chamfer_cm[3] = {0.1, 0.5, 1.0};          // 1, 5, 10 mm
};

struct MatchEvaluation {
    const CorrespondenceSet* correspondences = nullptr;
    const PointCloud* ref = nullptr;
    const PointCloud* tgt = nullptr;
    Pose gt;
};

struct RecallReport {
    double recall = 0;
    std::vector<double> inlier_ratios;
    std::size_t empty_sets = 0;  // counted as unmatched
};

inline constexpr double kFmrInlierDistance = 0.05;  // tau_1, meters
inline constexpr double kFmrInlierRatio = 0.5;      // tau_2

/// A pair is matched when its inlier ratio is strictly above tau2, where
/// correspondence i is an inlier when |gt(x_i) - y_i| < tau1 meters.
RecallReport feature_match_recall(std::span<const MatchEvaluation> pairs, double tau1 = kFmrInlierDistance,
                                  double tau2 = kFmrInlierRatio);

}  // namespace gave
