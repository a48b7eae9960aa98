#pragma once

#include <string>
#include <vector>

#include "amflat/types.hpp"

namespace amflat {

/// Standard Denavit-Hartenberg row: T = Rz(eta + theta0) Tz(d) Tx(a) Rx(alpha).
struct DhRow {
  double a = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  double theta0 = 0.0;
};

struct LinkParams {
  DhRow dh;
  double mass = 0.0;
  Vec3 com = Vec3::Zero();          // CoM in the link frame L_i, m
  Mat3 inertia = Mat3::Zero();      // about the CoM, in L_i, kg m^2
};

/// Physical description of an aerial manipulator: rigid multi-rotor base
/// plus a k-link revolute arm.
///
/// The arm's DH chain starts in a mount frame L_0 fixed to the base
/// (rotation `mount_rotation` and offset `mount_offset` in B). The first
/// joint rotates about the mount frame's z axis.
struct AMParams {
  double base_mass = 1.0;
  Mat3 base_inertia = Mat3::Identity();
  Mat3 mount_rotation = Mat3::Identity();
  Vec3 mount_offset = Vec3::Zero();
  std::vector<LinkParams> links;
  double gravity = 9.81;

  int k() const { return static_cast<int>(links.size()); }
  int dof() const { return 6 + k(); }
  double total_mass() const;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// CoM at the geometric midpoint of the link's DH segment, in L_i.
Vec3 midpoint_com(const DhRow& dh);

/// The bundled two-link planar model: 2.7 kg base, links of 0.25 m and
/// 0.2 m with 0.5 kg and 1.0 kg, joint axes along y_b so the arm moves in
/// the x_b-z_b plane.
AMParams planar_two_link_model();

/// Parse from a JSON document (see README for keys).
AMParams params_from_json_text(const std::string& text);
AMParams load_params(const std::string& path);

}  // namespace amflat
