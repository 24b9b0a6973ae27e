#include "gave/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gave/error.hpp"

namespace gave {

double rotation_error(const Mat3& estimate, const Mat3& truth) {
    // Same angle as acos((trace - 1) / 2), but acos loses about half the
    // digits near zero; the sine from the skew part keeps small errors exact.
    const Mat3 rel = truth.transpose() * estimate;
    const double c = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
    const double s = 0.5 * Vec3(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1)).norm();
    return std::atan2(s, c) * 180.0 / std::numbers::pi;
}

double translation_error(const Vec3& estimate, const Vec3& truth) { return (estimate - truth).norm() * 1000.0; }

namespace {

double squared_distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x() - b.x(), dy = a.y() - b.y(), dz = a.z() - b.z();
    return dx * dx + dy * dy + dz * dz;
}

}  // namespace

NearestNeighborGrid::NearestNeighborGrid(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
    if (points_.empty()) throw Error(ErrorKind::Empty, "nearest-neighbor grid needs points");
    Vec3 lo = points_.front(), hi = points_.front();
    for (const auto& p : points_) {
        if (!p.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite point");
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    origin_ = lo;
    const Vec3 ext = hi - lo;
    const double longest = ext.maxCoeff();
    const auto n = static_cast<double>(points_.size());
    if (longest > 0) {
        const double floor_ext = longest / 1024.0;
        const double volume = std::max(ext.x(), floor_ext) * std::max(ext.y(), floor_ext) * std::max(ext.z(), floor_ext);
        cell_ = std::max(std::cbrt(2.0 * volume / n), floor_ext);
    }
    for (;;) {
        extent_ = {static_cast<long>(ext.x() / cell_) + 1, static_cast<long>(ext.y() / cell_) + 1,
                   static_cast<long>(ext.z() / cell_) + 1};
        const double cells = static_cast<double>(extent_.x) * extent_.y * extent_.z;
        if (cells <= 8.0 * n + 1024.0) break;
        cell_ *= 1.5;
    }

    const std::size_t total = static_cast<std::size_t>(extent_.x * extent_.y * extent_.z);
    bucket_start_.assign(total + 1, 0);
    std::vector<std::size_t> ids(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const Cell c = cell_of(points_[i]);
        ids[i] = bucket(c.x, c.y, c.z);
        ++bucket_start_[ids[i] + 1];
    }
    for (std::size_t b = 0; b < total; ++b) bucket_start_[b + 1] += bucket_start_[b];
    order_.resize(points_.size());
    std::vector<std::size_t> fill(bucket_start_.begin(), bucket_start_.end() - 1);
    for (std::size_t i = 0; i < points_.size(); ++i) order_[fill[ids[i]]++] = i;
}

NearestNeighborGrid::Cell NearestNeighborGrid::cell_of(const Vec3& p) const {
    const Vec3 rel = (p - origin_) / cell_;
    return {static_cast<long>(std::floor(rel.x())), static_cast<long>(std::floor(rel.y())),
            static_cast<long>(std::floor(rel.z()))};
}

std::size_t NearestNeighborGrid::bucket(long x, long y, long z) const {
    x = std::clamp(x, 0L, extent_.x - 1);
    y = std::clamp(y, 0L, extent_.y - 1);
    z = std::clamp(z, 0L, extent_.z - 1);
    return static_cast<std::size_t>((z * extent_.y + y) * extent_.x + x);
}

double NearestNeighborGrid::nearest_squared(const Vec3& q) const {
    const Cell c = cell_of(q);
    double best = std::numeric_limits<double>::infinity();
    auto visit = [&](long x, long y, long z) {
        const std::size_t b = static_cast<std::size_t>((z * extent_.y + y) * extent_.x + x);
        for (std::size_t k = bucket_start_[b]; k < bucket_start_[b + 1]; ++k)
            best = std::min(best, squared_distance(q, points_[order_[k]]));
    };
    // Beyond this ring every cell of the grid has been visited.
    const long last_ring = std::max({std::abs(c.x), std::abs(c.x - (extent_.x - 1)), std::abs(c.y),
                                     std::abs(c.y - (extent_.y - 1)), std::abs(c.z), std::abs(c.z - (extent_.z - 1))});
    for (long r = 0; r <= last_ring; ++r) {
        const long x0 = std::max(c.x - r, 0L), x1 = std::min(c.x + r, extent_.x - 1);
        const long y0 = std::max(c.y - r, 0L), y1 = std::min(c.y + r, extent_.y - 1);
        for (long x = x0; x <= x1; ++x) {
            for (long y = y0; y <= y1; ++y) {
                if (std::abs(x - c.x) == r || std::abs(y - c.y) == r) {
                    for (long z = std::max(c.z - r, 0L); z <= std::min(c.z + r, extent_.z - 1); ++z) visit(x, y, z);
                } else {
                    if (c.z - r >= 0 && c.z - r < extent_.z) visit(x, y, c.z - r);
                    if (r > 0 && c.z + r >= 0 && c.z + r < extent_.z) visit(x, y, c.z + r);
                }
            }
        }
        // Points in rings beyond r are at least r cells away from q.
        const double bound = static_cast<double>(r) * cell_;
        if (best <= bound * bound) break;
    }
    return best;
}

double chamfer_distance(std::span<const Vec3> a, std::span<const Vec3> b) {
    if (a.empty() || b.empty()) throw Error(ErrorKind::Empty, "chamfer distance needs two non-empty clouds");
    auto directed = [](std::span<const Vec3> from, std::span<const Vec3> to) {
        const NearestNeighborGrid grid(to);
        double sum = 0;
        for (const auto& p : from) sum += std::sqrt(grid.nearest_squared(p));
        return sum / static_cast<double>(from.size());
    };
    return 0.5 * (directed(a, b) + directed(b, a)) * 100.0;
}

std::vector<double> accuracy_table(std::span<const double> errors, std::span<const double> thresholds) {
    if (errors.empty()) throw Error(ErrorKind::Empty, "accuracy table needs at least one error");
    std::vector<double> out;
    out.reserve(thresholds.size());
    for (double t : thresholds) {
        const auto below = std::count_if(errors.begin(), errors.end(), [t](double e) { return e < t; });
        out.push_back(static_cast<double>(below) / static_cast<double>(errors.size()));
    }
    return out;
}

RecallReport feature_match_recall(std::span<const MatchEvaluation> pairs, double tau1, double tau2) {
    if (pairs.empty()) throw Error(ErrorKind::Empty, "feature match recall needs at least one pair");
    RecallReport report;
    std::size_t matched = 0;
    for (const auto& pair : pairs) {
        const CorrespondenceSet& set = *pair.correspondences;
        if (set.empty()) {
            ++report.empty_sets;
            report.inlier_ratios.push_back(0.0);
            continue;
        }
        std::size_t inliers = 0;
        for (const auto& m : set) {
            const Vec3 d = pair.gt(pair.ref->positions.at(m.ref_index)) - pair.tgt->positions.at(m.tgt_index);
            if (d.norm() < tau1) ++inliers;
        }
        const double ratio = static_cast<double>(inliers) / static_cast<double>(set.size());
        report.inlier_ratios.push_back(ratio);
        if (ratio > tau2) ++matched;
    }
    report.recall = static_cast<double>(matched) / static_cast<double>(pairs.size());
    return report;
}

}  // namespace gave
