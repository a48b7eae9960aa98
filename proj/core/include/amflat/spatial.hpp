#pragma once

#include "amflat/types.hpp"

namespace amflat {

/// Roll-pitch-yaw attitude of the aerial base.
///
/// The rotation R_eb is composed as Rz(psi) * Ry(theta) * Rx(phi), which is
/// the composition for which dR/dt = R * skew(Xi(xi) * xi_dot) with the
/// body-rate map of euler_rate_matrix().
struct EulerAngles {
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;

  Vec3 vec() const { return {phi, theta, psi}; }
  static EulerAngles from(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
};

using Rotation = Mat3;

Rotation rotation_from_euler(const EulerAngles& xi);

/// Partial derivatives of rotation_from_euler() with respect to phi, theta
/// and psi (index 0, 1, 2).
Rotation rotation_partial(const EulerAngles& xi, int axis);

/// Body-rate map: omega_b = Xi(xi) * xi_dot.
Mat3 euler_rate_matrix(const EulerAngles& xi);

/// Time derivative of Xi along xi_dot.
Mat3 euler_rate_matrix_dot(const EulerAngles& xi, const Vec3& xi_dot);

/// Inverse of Xi. Throws SingularityError when |cos(theta)| < 1e-6.
Mat3 euler_rate_matrix_inverse(const EulerAngles& xi);

Mat3 skew(const Vec3& v);

/// Inverse of skew() on the skew-symmetric part of m.
Vec3 vee(const Mat3& m);

/// gamma = R_eb^T e3, the direction of gravity in the body frame.
Vec3 gravity_direction(const EulerAngles& xi);

Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

}  // namespace amflat
