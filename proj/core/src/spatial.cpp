#include "amflat/spatial.hpp"

#include <cmath>

namespace amflat {

Mat3 rot_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return r;
}

Mat3 rot_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return r;
}

Mat3 rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return r;
}

Rotation rotation_from_euler(const EulerAngles& xi) {
  return rot_z(xi.psi) * rot_y(xi.theta) * rot_x(xi.phi);
}

Rotation rotation_partial(const EulerAngles& xi, int axis) {
  // d/da R(a) = R(a) * skew(axis unit vector) for each elementary rotation.
  switch (axis) {
    case 0:
      return rot_z(xi.psi) * rot_y(xi.theta) * rot_x(xi.phi) * skew(Vec3::UnitX());
    case 1:
      return rot_z(xi.psi) * rot_y(xi.theta) * skew(Vec3::UnitY()) * rot_x(xi.phi);
    case 2:
      return rot_z(xi.psi) * skew(Vec3::UnitZ()) * rot_y(xi.theta) * rot_x(xi.phi);
    default:
      throw std::out_of_range("rotation_partial: axis must be 0, 1 or 2");
  }
}

Mat3 euler_rate_matrix(const EulerAngles& xi) {
  const double sp = std::sin(xi.phi), cp = std::cos(xi.phi);
  const double st = std::sin(xi.theta), ct = std::cos(xi.theta);
  Mat3 m;
  m << 1, 0, -st,
       0, cp, sp * ct,
       0, -sp, cp * ct;
  return m;
}

Mat3 euler_rate_matrix_dot(const EulerAngles& xi, const Vec3& xi_dot) {
  const double sp = std::sin(xi.phi), cp = std::cos(xi.phi);
  const double st = std::sin(xi.theta), ct = std::cos(xi.theta);
  const double dphi = xi_dot.x(), dtheta = xi_dot.y();
  Mat3 m;
  m << 0, 0, -ct * dtheta,
       0, -sp * dphi, cp * ct * dphi - sp * st * dtheta,
       0, -cp * dphi, -sp * ct * dphi - cp * st * dtheta;
  return m;
}

Mat3 euler_rate_matrix_inverse(const EulerAngles& xi) {
  const double sp = std::sin(xi.phi), cp = std::cos(xi.phi);
  const double st = std::sin(xi.theta), ct = std::cos(xi.theta);
  if (std::abs(ct) < 1e-6) {
    throw SingularityError(SingularityError::Kind::kEulerKinematics,
                           "Euler-rate map is singular (|cos(theta)| < 1e-6)");
  }
  const double tt = st / ct;
  Mat3 m;
  m << 1, sp * tt, cp * tt,
       0, cp, -sp,
       0, sp / ct, cp / ct;
  return m;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(),
       v.z(), 0, -v.x(),
       -v.y(), v.x(), 0;
  return m;
}

Vec3 vee(const Mat3& m) {
  return 0.5 * Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

Vec3 gravity_direction(const EulerAngles& xi) {
  // Third row of R_eb, written out so the norm is exactly trigonometric.
  const double sp = std::sin(xi.phi), cp = std::cos(xi.phi);
  const double st = std::sin(xi.theta), ct = std::cos(xi.theta);
  return {-st, ct * sp, ct * cp};
}

}  // namespace amflat
