#include "amflat/reduced_dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace amflat {

// --- state packing ---------------------------------------------------------

VecX ReducedState::to_vector() const {
  const int n = k();
  VecX v(9 + 2 * n);
  v << p, l, xi.vec(), eta, eta_dot;
  return v;
}

ReducedState ReducedState::from_vector(const VecX& v, int k) {
  if (v.size() != 9 + 2 * k) throw std::invalid_argument("ReducedState: expected 9+2k entries");
  ReducedState s;
  s.p = v.segment<3>(0);
  s.l = v.segment<3>(3);
  s.xi = EulerAngles::from(v.segment<3>(6));
  s.eta = v.segment(9, k);
  s.eta_dot = v.segment(9 + k, k);
  return s;
}

ReducedState ReducedState::zero(int k) {
  ReducedState s;
  s.eta = VecX::Zero(k);
  s.eta_dot = VecX::Zero(k);
  return s;
}

VecX ControlInput::to_vector() const {
  VecX v(tau_L.size() + 4);
  v << tau_L, thrust, tau_body;
  return v;
}

ControlInput ControlInput::from_vector(const VecX& v, int k) {
  if (v.size() != 4 + k) throw std::invalid_argument("ControlInput: expected 4+k entries");
  ControlInput u;
  u.tau_L = v.head(k);
  u.thrust = v[k];
  u.tau_body = v.segment<3>(k + 1);
  return u;
}

ControlInput ControlInput::zero(int k) {
  ControlInput u;
  u.tau_L = VecX::Zero(k);
  return u;
}

VecX ExtendedState::to_vector() const {
  const VecX qv = q.to_vector();
  VecX v(qv.size() + 2);
  v << qv, thrust, thrust_dot;
  return v;
}

ExtendedState ExtendedState::from_vector(const VecX& v, int k) {
  if (v.size() != 11 + 2 * k) throw std::invalid_argument("ExtendedState: expected 11+2k entries");
  ExtendedState s;
  s.q = ReducedState::from_vector(v.head(9 + 2 * k), k);
  s.thrust = v[9 + 2 * k];
  s.thrust_dot = v[10 + 2 * k];
  return s;
}

VecX ExtendedInput::to_vector() const {
  VecX v(tau_L.size() + 4);
  v << tau_L, thrust_ddot, tau_body;
  return v;
}

ExtendedInput ExtendedInput::from_vector(const VecX& v, int k) {
  if (v.size() != 4 + k) throw std::invalid_argument("ExtendedInput: expected 4+k entries");
  ExtendedInput u;
  u.tau_L = v.head(k);
  u.thrust_ddot = v[k];
  u.tau_body = v.segment<3>(k + 1);
  return u;
}

ExtendedInput ExtendedInput::zero(int k) {
  ExtendedInput u;
  u.tau_L = VecX::Zero(k);
  return u;
}

// --- momenta and connection ------------------------------------------------

MomentumPair momenta_from_velocities(const AMParams& params, const VecX& eta,
                                     const Vec3& s_dot_b, const Vec3& omega_b,
                                     const VecX& eta_dot) {
  const MassMatrix mass = mass_matrix(params, eta);
  Eigen::Matrix<double, 6, 1> vel;
  vel << s_dot_b, omega_b;
  const Eigen::Matrix<double, 6, 1> mom = mass.Ms() * vel + mass.Msl() * eta_dot;
  return {mom.head<3>(), mom.tail<3>()};
}

namespace {

BodyVelocities connection(const MassMatrix& mass, const Vec3& p, const Vec3& l,
                          const VecX& eta_dot) {
  const Eigen::Matrix<double, 6, 6> ms = mass.Ms();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(ms, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    throw SingularityError(SingularityError::Kind::kIllConditioned,
                           "group mass matrix Ms is ill-conditioned (cond > 1e12)");
  }
  Eigen::Matrix<double, 6, 1> rhs;
  rhs << p, l;
  rhs -= mass.Msl() * eta_dot;
  const Eigen::Matrix<double, 6, 1> vel = ms.ldlt().solve(rhs);
  return {vel.head<3>(), vel.tail<3>()};
}

ReducedKinematics evaluate_with_gamma(const AMParams& params, const ReducedState& state,
                                      const Vec3& gamma) {
  if (state.k() != params.k() || state.eta_dot.size() != params.k()) {
    throw std::invalid_argument("reduced state dimension does not match params");
  }
  ReducedKinematics kin;
  kin.total_mass = params.total_mass();
  kin.gravity = params.gravity;
  kin.mass = mass_matrix(params, state.eta);
  kin.mass_partials = mass_matrix_partials(params, state.eta);
  kin.mass_rate = mass_matrix_rate(kin.mass_partials, state.eta_dot);
  kin.com = manipulator_com(params, state.eta);
  kin.gamma = gamma;
  kin.gravity = params.gravity;
  kin.rotation = rotation_from_euler(state.xi);
  kin.velocity = connection(kin.mass, state.p, state.l, state.eta_dot);
  kin.x_dot.resize(params.dof());
  kin.x_dot << kin.velocity.s_dot_b, kin.velocity.omega_b, state.eta_dot;
  kin.p = state.p;
  kin.l = state.l;
  kin.xi = state.xi;
  kin.eta_dot = state.eta_dot;
  kin.coriolis = coriolis_matrix(kin.mass, kin.mass_partials, kin.x_dot);
  GravityTerms grav = gravity_terms(params, kin.com, gamma);
  kin.gravity_terms = std::move(grav);
  return kin;
}

}  // namespace

BodyVelocities velocities_from_momenta(const AMParams& params, const VecX& eta,
                                       const Vec3& p, const Vec3& l, const VecX& eta_dot) {
  return connection(mass_matrix(params, eta), p, l, eta_dot);
}

ReducedKinematics evaluate_kinematics(const AMParams& params, const ReducedState& state) {
  return evaluate_with_gamma(params, state, gravity_direction(state.xi));
}

// --- equations of motion ---------------------------------------------------

ReducedAccelerations accelerations(const ReducedKinematics& kin, const ControlInput& input) {
  const int k = kin.mass.k();
  const int n = 6 + k;
  const Vec3& omega = kin.velocity.omega_b;
  const Vec3& sdot = kin.velocity.s_dot_b;

  ReducedAccelerations out;
  out.p_dot = kin.p.cross(omega) + kin.gravity_terms.tau_p + input.thrust * Vec3::UnitZ();
  out.l_dot = kin.p.cross(sdot) + kin.l.cross(omega) + kin.gravity_terms.tau_l + input.tau_body;

  VecX generalized_input = VecX::Zero(n);
  generalized_input[2] = input.thrust;
  generalized_input.segment<3>(3) = input.tau_body;
  generalized_input.tail(k) = input.tau_L;

  const VecX rhs = -kin.coriolis * kin.x_dot - kin.gravity_terms.generalized() + generalized_input;
  out.x_ddot = kin.mass.m.ldlt().solve(rhs);
  out.eta_ddot = out.x_ddot.tail(k);
  return out;
}

MomentumRates momentum_dot(const AMParams& params, const ReducedState& state,
                           const Vec3& gamma, const ControlInput& input) {
  const ReducedKinematics kin = evaluate_with_gamma(params, state, gamma);
  const ReducedAccelerations acc = accelerations(kin, input);
  return {acc.p_dot, acc.l_dot};
}

VecX shape_ddot(const AMParams& params, const ReducedState& state, const Vec3& gamma,
                const ControlInput& input) {
  const ReducedKinematics kin = evaluate_with_gamma(params, state, gamma);
  return accelerations(kin, input).eta_ddot;
}

AdvectedPair advect(const Vec3& omega_b, const Vec3& s_dot_b, const AdvectedPair& pair) {
  return {-omega_b.cross(pair.gamma), -omega_b.cross(pair.zeta) + s_dot_b};
}

namespace {

VecX assemble_q_dot(const ReducedKinematics& kin, const ReducedAccelerations& acc,
                    const Mat3& xi_inv) {
  const int k = kin.mass.k();
  VecX q_dot(9 + 2 * k);
  q_dot << acc.p_dot, acc.l_dot, xi_inv * kin.velocity.omega_b, kin.eta_dot, acc.eta_ddot;
  return q_dot;
}

}  // namespace

ControlAffine drift_and_actuation(const AMParams& params, const ReducedState& q) {
  const int k = params.k();
  const int n = 6 + k;
  const Mat3 xi_inv = euler_rate_matrix_inverse(q.xi);
  const ReducedKinematics kin = evaluate_kinematics(params, q);

  ControlAffine out;
  out.f = assemble_q_dot(kin, accelerations(kin, ControlInput::zero(k)), xi_inv);

  // X = [0 I] M^-1, applied to the generalized-force columns of each input.
  const MatX minv = kin.mass.m.ldlt().solve(MatX::Identity(n, n));
  const MatX x_proj = minv.bottomRows(k);

  out.G = MatX::Zero(9 + 2 * k, 4 + k);
  out.G(2, k) = 1.0;
  out.G.block<3, 3>(3, k + 1).setIdentity();
  const int shape_rows = 9 + k;
  out.G.block(shape_rows, 0, k, k) = x_proj.rightCols(k);
  out.G.block(shape_rows, k, k, 1) = x_proj.col(2);
  out.G.block(shape_rows, k + 1, k, 3) = x_proj.middleCols(3, 3);
  return out;
}

VecX reduced_dynamics(const AMParams& params, const ReducedState& q, const ControlInput& u) {
  const Mat3 xi_inv = euler_rate_matrix_inverse(q.xi);
  const ReducedKinematics kin = evaluate_kinematics(params, q);
  return assemble_q_dot(kin, accelerations(kin, u), xi_inv);
}

ControlInput reduced_input(const ExtendedState& q_de, const ExtendedInput& u_de) {
  ControlInput u;
  u.tau_L = u_de.tau_L;
  u.thrust = q_de.thrust;
  u.tau_body = u_de.tau_body;
  return u;
}

VecX extended_dynamics(const AMParams& params, const ExtendedState& q_de,
                       const ExtendedInput& u_de) {
  const VecX q_dot = reduced_dynamics(params, q_de.q, reduced_input(q_de, u_de));
  VecX out(q_dot.size() + 2);
  out << q_dot, q_de.thrust_dot, u_de.thrust_ddot;
  return out;
}

Energies energies(const AMParams& params, const ReducedState& state, const Vec3& zeta) {
  const MassMatrix mass = mass_matrix(params, state.eta);
  const BodyVelocities vel = connection(mass, state.p, state.l, state.eta_dot);
  VecX x_dot(params.dof());
  x_dot << vel.s_dot_b, vel.omega_b, state.eta_dot;
  Energies e;
  e.kinetic = kinetic_energy(mass, x_dot);
  e.potential = potential_energy(params, state.eta, gravity_direction(state.xi), zeta);
  return e;
}

}  // namespace amflat
