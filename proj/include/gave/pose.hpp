#pragma once

#include <Eigen/Core>

#include <vector>

namespace gave {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Rigid transform p' = rotation * p + translation (meters).
struct Pose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static Pose identity() { return {}; }
    static Pose from_matrix(const Mat4& m);
    Mat4 matrix() const;

    Vec3 operator()(const Vec3& p) const { return rotation * p + translation; }

    /// Orthonormal with det +1 within `tol`.
    bool is_valid(double tol = 1e-6) const;
};

Pose pose_compose(const Pose& a, const Pose& b);  // a after b
Pose pose_inverse(const Pose& a);
std::vector<Vec3> transform(const std::vector<Vec3>& points, const Pose& pose);

/// Rotation about a unit axis (Rodrigues).
Mat3 axis_angle(const Vec3& axis, double radians);

}  // namespace gave
