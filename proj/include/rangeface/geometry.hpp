#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace rangeface {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rigid motion p -> R*p + t.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

    RigidTransform inverse() const {
        RigidTransform inv;
        inv.rotation = rotation.transpose();
        inv.translation = -(inv.rotation * translation);
        return inv;
    }

    /// Transform equivalent to applying *this first, then next.
    RigidTransform then(const RigidTransform& next) const {
        RigidTransform out;
        out.rotation = next.rotation * rotation;
        out.translation = next.rotation * translation + next.translation;
        return out;
    }

    /// Rotation is orthonormal with determinant +1, within tol.
    bool is_valid(double tol = 1e-9) const {
        Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
        return err.cwiseAbs().maxCoeff() <= tol &&
               std::abs(rotation.determinant() - 1.0) <= tol;
    }
};

inline double deg_to_rad(double deg) { return deg * M_PI / 180.0; }

inline Mat3 rotation_x_deg(double deg) {
    return Eigen::AngleAxisd(deg_to_rad(deg), Vec3::UnitX()).toRotationMatrix();
}
inline Mat3 rotation_y_deg(double deg) {
    return Eigen::AngleAxisd(deg_to_rad(deg), Vec3::UnitY()).toRotationMatrix();
}
inline Mat3 rotation_z_deg(double deg) {
    return Eigen::AngleAxisd(deg_to_rad(deg), Vec3::UnitZ()).toRotationMatrix();
}

/// Euler angles in degrees, applied as R = Rz * Ry * Rx.
inline Mat3 euler_deg_to_matrix(double rx, double ry, double rz) {
    return rotation_z_deg(rz) * rotation_y_deg(ry) * rotation_x_deg(rx);
}

/// Rotation angle of R in degrees; 0 for the identity.
inline double rotation_angle_deg(const Mat3& r) {
    double c = (r.trace() - 1.0) / 2.0;
    c = std::clamp(c, -1.0, 1.0);
    return std::acos(c) * 180.0 / M_PI;
}

}  // namespace rangeface
