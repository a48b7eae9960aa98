#pragma once

#include <vector>

#include "amflat/params.hpp"
#include "amflat/types.hpp"

namespace amflat {

/// Pose of link frame L_i and its CoM, both expressed in the base frame B.
struct LinkFrame {
  Vec3 origin = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 com = Vec3::Zero();
  /// Joint i axis (z of L_{i-1}) and a point on it, in B.
  Vec3 joint_axis = Vec3::UnitZ();
  Vec3 joint_origin = Vec3::Zero();
};

std::vector<LinkFrame> forward_kinematics(const AMParams& params, const VecX& eta);

/// First mass moment of the arm in B and its Jacobian with respect to eta.
struct ManipCoM {
  Vec3 delta = Vec3::Zero();     // kg m
  Eigen::Matrix<double, 3, Eigen::Dynamic> d_delta;
};

ManipCoM manipulator_com(const AMParams& params, const VecX& eta);

/// Mass matrix of the kinetic-energy quadratic form over
/// x_dot = (s_dot_b, omega_b, eta_dot).
struct MassMatrix {
  MatX m;

  int k() const { return static_cast<int>(m.rows()) - 6; }
  auto Mp() const { return m.block<3, 3>(0, 0); }
  auto Mpw() const { return m.block<3, 3>(0, 3); }
  auto Mpl() const { return m.block(0, 6, 3, k()); }
  auto Mw() const { return m.block<3, 3>(3, 3); }
  auto Mwl() const { return m.block(3, 6, 3, k()); }
  auto Ml() const { return m.block(6, 6, k(), k()); }
  /// Group block [[Mp, Mpw], [Mpw^T, Mw]].
  auto Ms() const { return m.block<6, 6>(0, 0); }
  /// Group-shape coupling [Mpl; Mwl].
  auto Msl() const { return m.block(0, 6, 6, k()); }
};

MassMatrix mass_matrix(const AMParams& params, const VecX& eta);

/// dM/d(eta_j) for j = 0..k-1 by five-point central differences. M does not
/// depend on the group coordinates, so these are the only non-zero partials.
std::vector<MatX> mass_matrix_partials(const AMParams& params, const VecX& eta,
                                       double step = 1e-3);

/// dM/dt = sum_j dM/d(eta_j) * eta_dot_j.
MatX mass_matrix_rate(const std::vector<MatX>& partials, const VecX& eta_dot);

/// Christoffel-symbol Coriolis matrix
///   C(p,j) = sum_i 1/2 (dM(p,j)/dx_i + dM(p,i)/dx_j - dM(i,j)/dx_p) x_dot_i
/// over the 6+k coordinates. Satisfies dM/dt - 2C skew-symmetric.
MatX christoffel_coriolis(const std::vector<MatX>& partials, const VecX& x_dot);

/// Skew-symmetric coupling from the SE(3) body-velocity structure:
/// C_se3 * x_dot = (omega x p, s_dot_b x p + omega x l, 0) with
/// (p, l) = Ms * (s_dot_b, omega) + Msl * eta_dot.
MatX se3_coriolis(const MassMatrix& mass, const VecX& x_dot);

/// Full Coriolis matrix for the body-velocity coordinates:
/// christoffel_coriolis + se3_coriolis. Linear in x_dot, dM/dt - 2C skew.
MatX coriolis_matrix(const AMParams& params, const VecX& eta, const VecX& x_dot);
MatX coriolis_matrix(const MassMatrix& mass, const std::vector<MatX>& partials,
                     const VecX& x_dot);

/// Gravity wrench on the base (in B) and the gradient of the potential with
/// respect to the joint angles.
struct GravityTerms {
  Vec3 tau_p = Vec3::Zero();   // N
  Vec3 tau_l = Vec3::Zero();   // N m
  VecX dV_deta;                // N m

  /// Potential term D = dV/dx over (s_b, theta_b, eta): (-tau_p, -tau_l, dV/deta).
  VecX generalized() const;
};

/// Throws std::invalid_argument when |gamma| deviates from 1 by more than 1e-6.
GravityTerms gravity_terms(const AMParams& params, const VecX& eta, const Vec3& gamma);
GravityTerms gravity_terms(const AMParams& params, const ManipCoM& com, const Vec3& gamma);

double kinetic_energy(const MassMatrix& mass, const VecX& x_dot);

/// V_AM = g (m_t <gamma, zeta> + <gamma, Delta>).
double potential_energy(const AMParams& params, const VecX& eta, const Vec3& gamma,
                        const Vec3& zeta);

}  // namespace amflat
