#pragma once

#include <functional>
#include <random>

#include "amflat/params.hpp"
#include "amflat/reduced_dynamics.hpp"
#include "amflat/types.hpp"

namespace amflat::oracle {

/// Unreduced coordinates q = (s_eb, xi, eta) with s_eb in E, and their rates.
/// Dimension 6 + k each.
struct FullCoordinates {
  VecX q;
  VecX q_dot;

  int k() const { return static_cast<int>(q.size()) - 6; }
};

/// Lagrangian L = K_tot - V_AM evaluated from per-body world-frame
/// kinematics. Shares no code with the reduced path apart from AMParams.
double lagrangian(const AMParams& params, const VecX& q, const VecX& q_dot);
double kinetic_energy(const AMParams& params, const VecX& q, const VecX& q_dot);
double potential_energy(const AMParams& params, const VecX& q);

/// Generalized forces of thrust (at the base origin along b3), body torque
/// and joint torques.
VecX generalized_forces(const AMParams& params, const VecX& q, const ControlInput& input);

/// Solves M~ q_ddot = Q_nc + dL/dq - (d pi/dq) q_dot with every term taken
/// from finite differences of lagrangian(). Velocity derivatives use a unit
/// step (L is quadratic in q_dot, so the stencil is exact); position
/// derivatives use `step`. Throws SingularityError(kIllConditioned) when
/// the Jacobi-scaled M~ has condition number above 1e12.
VecX full_lagrangian_accel(const AMParams& params, const FullCoordinates& x,
                           const ControlInput& input, double step = 1e-6);

/// Numeric M~(q).
MatX full_mass_matrix(const AMParams& params, const VecX& q);

/// Central differences, column j = (f(x + h e_j) - f(x - h e_j)) / 2h.
MatX finite_difference_jacobian(const std::function<VecX(const VecX&)>& f,
                                const VecX& x, double step);

/// Full coordinates matching a reduced state. zeta = R^T s_eb fixes the
/// base position, which the reduced state does not carry.
FullCoordinates full_from_reduced(const AMParams& params, const ReducedState& state,
                                  const Vec3& zeta = Vec3::Zero());

/// Reduced state (momenta via the reduced mass matrix) from full coordinates.
ReducedState reduced_from_full(const AMParams& params, const FullCoordinates& x);

/// Maps reduced body-velocity accelerations (s_ddot_b, omega_dot_b, eta_ddot)
/// to q_ddot = (s_ddot_eb, xi_ddot, eta_ddot).
VecX full_accel_from_reduced(const AMParams& params, const ReducedState& state,
                             const VecX& x_ddot);

/// Random configuration well inside the valid region: |phi|, |theta| <= 0.6,
/// body and joint rates in [-2, 2].
ReducedState random_state(const AMParams& params, std::mt19937_64& rng);

/// Thrust in [0.5, 1.5] m_t g, body torques in [-1, 1], joint torques in [-2, 2].
ControlInput random_input(const AMParams& params, std::mt19937_64& rng);

/// |a - b| / max(|b|, 1).
double relative_error(const VecX& a, const VecX& b);

}  // namespace amflat::oracle
