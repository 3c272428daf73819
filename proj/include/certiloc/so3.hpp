#pragma once

#include <Eigen/Core>

namespace certiloc {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

// Skew-symmetric matrix such that hat(w) * v == w.cross(v).
Mat3 hat(const Vec3& w);

// Rodrigues exponential of an axis-angle vector.
Mat3 exp_so3(const Vec3& w);

// Rotation angle of R in [0, pi], clamped against round-off.
double rotation_angle(const Mat3& R);

// Geodesic distance on SO(3): angle of Ra^T * Rb.
double geodesic_distance(const Mat3& Ra, const Mat3& Rb);

// Unit quaternion [w, x, y, z] to rotation matrix.
Mat3 quat_to_rot(double w, double x, double y, double z);

// ||R^T R - I||_F and det sign check in one call.
bool is_rotation(const Mat3& R, double tol = 1e-9);

}  // namespace certiloc
