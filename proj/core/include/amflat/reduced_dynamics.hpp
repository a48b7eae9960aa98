#pragma once

#include <vector>

#include "amflat/mechanism.hpp"
#include "amflat/params.hpp"
#include "amflat/spatial.hpp"
#include "amflat/types.hpp"

namespace amflat {

/// Reduced state q = (p, l, xi, eta, eta_dot), dimension 9 + 2k.
///
/// p and l are the generalized linear and angular momenta conjugate to the
/// body velocities (s_dot_b, omega_b), both expressed in B.
struct ReducedState {
  Vec3 p = Vec3::Zero();
  Vec3 l = Vec3::Zero();
  EulerAngles xi;
  VecX eta;
  VecX eta_dot;

  int k() const { return static_cast<int>(eta.size()); }
  VecX to_vector() const;
  static ReducedState from_vector(const VecX& v, int k);
  static ReducedState zero(int k);
};

/// u = (tau_L, T, tau_phi, tau_theta, tau_psi), dimension 4 + k.
struct ControlInput {
  VecX tau_L;
  double thrust = 0.0;
  Vec3 tau_body = Vec3::Zero();

  VecX to_vector() const;
  static ControlInput from_vector(const VecX& v, int k);
  static ControlInput zero(int k);
};

/// q_de = (q, T, T_dot), dimension 11 + 2k.
struct ExtendedState {
  ReducedState q;
  double thrust = 0.0;
  double thrust_dot = 0.0;

  int k() const { return q.k(); }
  VecX to_vector() const;
  static ExtendedState from_vector(const VecX& v, int k);
};

/// u_de = (tau_L, T_ddot, tau_phi, tau_theta, tau_psi), dimension 4 + k.
struct ExtendedInput {
  VecX tau_L;
  double thrust_ddot = 0.0;
  Vec3 tau_body = Vec3::Zero();

  VecX to_vector() const;
  static ExtendedInput from_vector(const VecX& v, int k);
  static ExtendedInput zero(int k);
};

/// Body-frame gravity direction and base position, gamma = R^T e3 and
/// zeta = R^T s_eb.
struct AdvectedPair {
  Vec3 gamma = Vec3::UnitZ();
  Vec3 zeta = Vec3::Zero();
};

struct MomentumPair {
  Vec3 p = Vec3::Zero();
  Vec3 l = Vec3::Zero();

  Eigen::Matrix<double, 6, 1> stacked() const {
    Eigen::Matrix<double, 6, 1> v;
    v << p, l;
    return v;
  }
};

struct BodyVelocities {
  Vec3 s_dot_b = Vec3::Zero();
  Vec3 omega_b = Vec3::Zero();
};

MomentumPair momenta_from_velocities(const AMParams& params, const VecX& eta,
                                     const Vec3& s_dot_b, const Vec3& omega_b,
                                     const VecX& eta_dot);

/// Connection: (s_dot_b, omega_b) = Ms^-1 ((p, l) - Msl eta_dot).
/// Throws SingularityError when cond(Ms) > 1e12.
BodyVelocities velocities_from_momenta(const AMParams& params, const VecX& eta,
                                       const Vec3& p, const Vec3& l, const VecX& eta_dot);

/// Everything about a reduced state that does not depend on the input.
struct ReducedKinematics {
  double total_mass = 0.0;
  double gravity = 0.0;
  MassMatrix mass;
  std::vector<MatX> mass_partials;   // dM/d(eta_j)
  MatX mass_rate;                    // dM/dt along eta_dot
  ManipCoM com;
  GravityTerms gravity_terms;
  Vec3 gamma = Vec3::UnitZ();
  Rotation rotation = Rotation::Identity();
  BodyVelocities velocity;
  VecX x_dot;                        // (s_dot_b, omega_b, eta_dot)
  Vec3 p = Vec3::Zero();
  Vec3 l = Vec3::Zero();
  EulerAngles xi;
  VecX eta_dot;
  MatX coriolis;                     // full Coriolis matrix at x_dot
};

ReducedKinematics evaluate_kinematics(const AMParams& params, const ReducedState& state);

struct ReducedAccelerations {
  Vec3 p_dot = Vec3::Zero();
  Vec3 l_dot = Vec3::Zero();
  VecX eta_ddot;
  /// (s_ddot_b, omega_dot_b, eta_ddot), the body-velocity accelerations.
  VecX x_ddot;
};

/// Solves M x_ddot = -C x_dot - D + (0, 0, T, tau_body, tau_L) and the
/// momentum equations for one input.
ReducedAccelerations accelerations(const ReducedKinematics& kin, const ControlInput& input);

struct MomentumRates {
  Vec3 p_dot = Vec3::Zero();
  Vec3 l_dot = Vec3::Zero();
};

/// p_dot = p x omega + tau_p + T e3,
/// l_dot = p x s_dot_b + l x omega + tau_l + tau_body.
/// gamma is taken from the caller and must be a unit vector.
MomentumRates momentum_dot(const AMParams& params, const ReducedState& state,
                           const Vec3& gamma, const ControlInput& input);

/// eta_ddot = [0 I] M^-1 (-C x_dot - D + stacked input).
VecX shape_ddot(const AMParams& params, const ReducedState& state, const Vec3& gamma,
                const ControlInput& input);

/// gamma_dot = -omega x gamma, zeta_dot = -omega x zeta + s_dot_b.
AdvectedPair advect(const Vec3& omega_b, const Vec3& s_dot_b, const AdvectedPair& pair);

/// q_dot = f(q) + G(q) u.
struct ControlAffine {
  VecX f;
  MatX G;
};

/// Throws SingularityError near the Euler singularity (|cos(theta)| < 1e-6).
ControlAffine drift_and_actuation(const AMParams& params, const ReducedState& q);

/// q_dot for a given input, assembled from the individual pieces.
VecX reduced_dynamics(const AMParams& params, const ReducedState& q, const ControlInput& u);

/// q_de_dot = f_de(q_de) + G_de(q_de) u_de.
VecX extended_dynamics(const AMParams& params, const ExtendedState& q_de,
                       const ExtendedInput& u_de);

/// The reduced input implied by an extended state and input.
ControlInput reduced_input(const ExtendedState& q_de, const ExtendedInput& u_de);

/// (K_tot, V_AM) for a reduced state and base position zeta = R^T s_eb.
struct Energies {
  double kinetic = 0.0;
  double potential = 0.0;
  double total() const { return kinetic + potential; }
};

Energies energies(const AMParams& params, const ReducedState& state, const Vec3& zeta);

}  // namespace amflat
