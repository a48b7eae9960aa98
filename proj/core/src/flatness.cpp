#include "amflat/flatness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "amflat/spatial.hpp"

namespace amflat {

VecX FlatSignal::stacked(int order) const {
  if (order < 0 || order > 2) throw std::out_of_range("FlatSignal::stacked: order must be 0..2");
  VecX s(4 + k());
  s << pe[order], psi[order], eta[order];
  return s;
}

VecX FlatSignal::top() const {
  VecX s(4 + k());
  s << pe[3], psi[2], eta[2];
  return s;
}

FlatSignal FlatSignal::constant(const Vec3& pe, double psi, const VecX& eta) {
  FlatSignal s;
  s.pe[0] = pe;
  s.psi[0] = psi;
  s.eta = {eta, VecX::Zero(eta.size()), VecX::Zero(eta.size())};
  return s;
}

double thrust_floor(const AMParams& params) {
  return 1e-3 * params.total_mass() * params.gravity;
}

double thrust_from_flat(const Vec3& pe_dot, double total_mass, double gravity, double t_min) {
  const double thrust = (pe_dot + total_mass * gravity * Vec3::UnitZ()).norm();
  if (!(thrust > t_min)) {
    throw SingularityError(SingularityError::Kind::kFreeFall,
                           "thrust magnitude at or below the free-fall guard");
  }
  return thrust;
}

RollPitch attitude_from_flat(const Vec3& pe_dot, double psi, double thrust, double total_mass,
                             double gravity) {
  const double sp = std::sin(psi), cp = std::cos(psi);
  double arg = (pe_dot.x() * sp - pe_dot.y() * cp) / thrust;
  if (!(std::abs(arg) <= 1.0 + 1e-9)) {
    throw SingularityError(SingularityError::Kind::kDomain, "roll asin argument outside [-1, 1]");
  }
  arg = std::clamp(arg, -1.0, 1.0);
  const double num = pe_dot.x() * cp + pe_dot.y() * sp;
  const double den = pe_dot.z() + total_mass * gravity;
  RollPitch rp;
  rp.phi = std::asin(arg);
  // den > 0 keeps theta inside (-pi/2, pi/2); atan2 fixes the quadrant.
  rp.theta = den > 0.0 ? std::atan2(num, den) : (num >= 0.0 ? kPi / 2.0 : -kPi / 2.0);
  const double limit = kPi / 2.0 - SingularityMargins::kAttitudeThreshold;
  if (!(std::abs(rp.phi) < limit) || !(std::abs(rp.theta) < limit)) {
    throw SingularityError(SingularityError::Kind::kAttitude,
                           "roll or pitch at the +-pi/2 singularity");
  }
  return rp;
}

FlatSignal flat_outputs_from_state(const AMParams& params, const ExtendedState& q_de,
                                   const ExtendedInput& u_de) {
  const ReducedKinematics kin = evaluate_kinematics(params, q_de.q);
  const ReducedAccelerations acc = accelerations(kin, reduced_input(q_de, u_de));
  const Mat3& rot = kin.rotation;
  const Vec3& omega = kin.velocity.omega_b;
  const Vec3 omega_dot = acc.x_ddot.segment<3>(3);
  const Vec3 e3 = Vec3::UnitZ();
  const double thrust = q_de.thrust, thrust_dot = q_de.thrust_dot;

  FlatSignal s;
  s.pe[0] = rot * q_de.q.p;
  s.pe[1] = -kin.total_mass * kin.gravity * e3 + rot * e3 * thrust;
  const Vec3 w = omega.cross(e3) * thrust + e3 * thrust_dot;
  s.pe[2] = rot * w;
  const Vec3 w_dot = omega_dot.cross(e3) * thrust + omega.cross(e3) * thrust_dot +
                     e3 * u_de.thrust_ddot;
  s.pe[3] = rot * (omega.cross(w) + w_dot);

  const Mat3 xi_inv = euler_rate_matrix_inverse(q_de.q.xi);
  const Vec3 xi_dot = xi_inv * omega;
  const Vec3 xi_ddot =
      xi_inv * (omega_dot - euler_rate_matrix_dot(q_de.q.xi, xi_dot) * xi_dot);
  s.psi = {q_de.q.xi.psi, xi_dot.z(), xi_ddot.z()};
  s.eta = {q_de.q.eta, q_de.q.eta_dot, acc.eta_ddot};
  return s;
}

namespace {

// Attitude, body rate and thrust profile recovered from (p_e', p_e'', psi, psi').
struct AttitudeKinematics {
  EulerAngles xi;
  Vec3 xi_dot = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 omega = Vec3::Zero();
  double thrust = 0.0;
  double thrust_dot = 0.0;
  Vec3 b3 = Vec3::UnitZ();
  Vec3 b3_dot = Vec3::Zero();
};

AttitudeKinematics attitude_kinematics(const AMParams& params, const FlatSignal& sigma) {
  const double mt = params.total_mass(), g = params.gravity;
  AttitudeKinematics ak;
  ak.thrust = thrust_from_flat(sigma.pe[1], mt, g, thrust_floor(params));
  const RollPitch rp = attitude_from_flat(sigma.pe[1], sigma.psi[0], ak.thrust, mt, g);
  ak.xi = {rp.phi, rp.theta, sigma.psi[0]};
  ak.rotation = rotation_from_euler(ak.xi);

  const Vec3 a = sigma.pe[1] + mt * g * Vec3::UnitZ();
  ak.b3 = a / ak.thrust;
  ak.thrust_dot = ak.b3.dot(sigma.pe[2]);
  ak.b3_dot = (sigma.pe[2] - ak.b3 * ak.thrust_dot) / ak.thrust;

  // R^T b3' = omega x e3 = (omega_y, -omega_x, 0).
  const Vec3 c = ak.rotation.transpose() * ak.b3_dot;
  const double sphi = std::sin(rp.phi), cphi = std::cos(rp.phi);
  const double sth = std::sin(rp.theta), cth = std::cos(rp.theta);
  const double psi_dot = sigma.psi[1];
  const double wx = -c.y(), wy = c.x();
  const double phi_dot = wx + sth * psi_dot;
  const double theta_dot = (wy - sphi * cth * psi_dot) / cphi;
  ak.xi_dot = {phi_dot, theta_dot, psi_dot};
  ak.omega = euler_rate_matrix(ak.xi) * ak.xi_dot;
  return ak;
}

ExtendedState assemble_state(const AMParams& params, const FlatSignal& sigma,
                             const AttitudeKinematics& ak) {
  const MassMatrix mass = mass_matrix(params, sigma.eta[0]);
  const Vec3 p = ak.rotation.transpose() * sigma.pe[0];
  const Vec3 sdot =
      mass.Mp().ldlt().solve(p - mass.Mpw() * ak.omega - mass.Mpl() * sigma.eta[1]);
  const Vec3 l = mass.Mpw().transpose() * sdot + mass.Mw() * ak.omega + mass.Mwl() * sigma.eta[1];

  ExtendedState out;
  out.q.p = p;
  out.q.l = l;
  out.q.xi = ak.xi;
  out.q.eta = sigma.eta[0];
  out.q.eta_dot = sigma.eta[1];
  out.thrust = ak.thrust;
  out.thrust_dot = ak.thrust_dot;
  return out;
}

}  // namespace

ExtendedState state_from_flat(const AMParams& params, const FlatSignal& sigma) {
  if (sigma.k() != params.k()) throw std::invalid_argument("flat signal size does not match params");
  return assemble_state(params, sigma, attitude_kinematics(params, sigma));
}

FlatInputs inputs_from_flat(const AMParams& params, const FlatSignal& sigma) {
  if (sigma.k() != params.k()) throw std::invalid_argument("flat signal size does not match params");
  const int k = params.k();
  const AttitudeKinematics ak = attitude_kinematics(params, sigma);
  const ExtendedState q_de = assemble_state(params, sigma, ak);

  // Thrust and attitude accelerations from p_e^(3) and psi''.
  const double thrust_ddot = ak.b3_dot.dot(sigma.pe[2]) + ak.b3.dot(sigma.pe[3]);
  const Vec3 b3_ddot =
      (sigma.pe[3] - 2.0 * ak.b3_dot * ak.thrust_dot - ak.b3 * thrust_ddot) / ak.thrust;
  const Vec3 c = ak.rotation.transpose() * ak.b3_dot;
  // d/dt (R^T b3') = omega_dot x e3.
  const Vec3 c_dot = -ak.omega.cross(c) + ak.rotation.transpose() * b3_ddot;
  const Vec3 r = euler_rate_matrix_dot(ak.xi, ak.xi_dot) * ak.xi_dot;
  const double sphi = std::sin(ak.xi.phi), cphi = std::cos(ak.xi.phi);
  const double cth = std::cos(ak.xi.theta);
  const double psi_ddot = sigma.psi[2];
  Vec3 omega_dot;
  omega_dot.x() = -c_dot.y();
  omega_dot.y() = c_dot.x();
  const double theta_ddot = (omega_dot.y() - r.y() - sphi * cth * psi_ddot) / cphi;
  omega_dot.z() = r.z() - sphi * theta_ddot + cphi * cth * psi_ddot;

  // Base linear acceleration from the linear momentum balance.
  const ReducedKinematics kin = evaluate_kinematics(params, q_de.q);
  const Vec3& omega = kin.velocity.omega_b;
  const Vec3& sdot = kin.velocity.s_dot_b;
  const Vec3 p_dot = kin.p.cross(omega) + kin.gravity_terms.tau_p + ak.thrust * Vec3::UnitZ();
  const VecX mdot_xdot = kin.mass_rate * kin.x_dot;
  const Vec3 sddot = kin.mass.Mp().ldlt().solve(
      p_dot - mdot_xdot.head<3>() - kin.mass.Mpw() * omega_dot - kin.mass.Mpl() * sigma.eta[2]);

  VecX x_ddot(6 + k);
  x_ddot << sddot, omega_dot, sigma.eta[2];
  const VecX m_xddot = kin.mass.m * x_ddot;
  const Vec3 l_dot = m_xddot.segment<3>(3) + mdot_xdot.segment<3>(3);

  FlatInputs out;
  out.extended.tau_body = l_dot - kin.l.cross(omega) - kin.gravity_terms.tau_l - kin.p.cross(sdot);
  out.extended.thrust_ddot = thrust_ddot;
  const VecX shape_balance =
      m_xddot + kin.coriolis * kin.x_dot + kin.gravity_terms.generalized();
  out.extended.tau_L = shape_balance.tail(k);
  out.reduced = reduced_input(q_de, out.extended);
  return out;
}

VecX auxiliary_input(const AMParams& params, const ExtendedState& q_de,
                     const ExtendedInput& u_de) {
  return flat_outputs_from_state(params, q_de, u_de).top();
}

AuxiliaryDecomposition auxiliary_decomposition(const AMParams& params,
                                               const ExtendedState& q_de) {
  const int k = params.k();
  const int m = 4 + k;
  // The input enters only through the accelerations, so evaluate the
  // input-independent kinematics once and probe the affine map.
  const ReducedKinematics kin = evaluate_kinematics(params, q_de.q);
  const Mat3 xi_inv = euler_rate_matrix_inverse(q_de.q.xi);
  const Vec3& omega = kin.velocity.omega_b;
  const Vec3 xi_dot = xi_inv * omega;
  const Mat3 xi_rate = euler_rate_matrix_dot(q_de.q.xi, xi_dot);
  const Vec3 e3 = Vec3::UnitZ();
  const double thrust = q_de.thrust, thrust_dot = q_de.thrust_dot;
  const Vec3 w = omega.cross(e3) * thrust + e3 * thrust_dot;

  auto v_of = [&](const VecX& u) {
    const ExtendedInput ue = ExtendedInput::from_vector(u, k);
    const ReducedAccelerations acc = accelerations(kin, reduced_input(q_de, ue));
    const Vec3 omega_dot = acc.x_ddot.segment<3>(3);
    const Vec3 w_dot = omega_dot.cross(e3) * thrust + omega.cross(e3) * thrust_dot +
                       e3 * ue.thrust_ddot;
    VecX v(m);
    v.head<3>() = kin.rotation * (omega.cross(w) + w_dot);
    v[3] = (xi_inv * (omega_dot - xi_rate * xi_dot)).z();
    v.tail(k) = acc.eta_ddot;
    return v;
  };

  AuxiliaryDecomposition out;
  VecX u = VecX::Zero(m);
  out.f_v = v_of(u);
  out.G_v.resize(m, m);
  for (int j = 0; j < m; ++j) {
    u.setZero();
    u[j] = 1.0;
    out.G_v.col(j) = v_of(u) - out.f_v;
  }
  Eigen::JacobiSVD<MatX> svd(out.G_v);
  const auto& sv = svd.singularValues();
  out.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                          : std::numeric_limits<double>::infinity();
  if (!(out.condition <= 1e10)) {
    throw SingularityError(SingularityError::Kind::kDecoupling,
                           "decoupling matrix G_v is singular (cond > 1e10)");
  }
  return out;
}

BrunovskyForm brunovsky_matrices(int k) {
  if (k < 1) throw std::invalid_argument("brunovsky_matrices: k must be >= 1");
  const int m = 4 + k;
  const int n = 11 + 2 * k;
  BrunovskyForm b;
  b.F = MatX::Zero(n, n);
  b.F.topRightCorner(7 + k, 7 + k).setIdentity();
  b.G = MatX::Zero(n, m);
  b.G.bottomRows(m).setIdentity();
  return b;
}

VecX to_brunovsky_order(const VecX& v) {
  const Eigen::Index m = v.size();
  VecX w(m);
  w << v.tail(m - 3), v.head<3>();
  return w;
}

VecX from_brunovsky_order(const VecX& w) {
  const Eigen::Index m = w.size();
  VecX v(m);
  v << w.tail<3>(), w.head(m - 3);
  return v;
}

namespace {

SingularityMargins margins_from(double phi, double theta, double thrust, double t_min) {
  SingularityMargins m;
  m.attitude = std::min(kPi / 2.0 - std::abs(phi), kPi / 2.0 - std::abs(theta));
  m.thrust = thrust - t_min;
  m.cos_product = std::abs(std::cos(phi) * std::cos(theta));
  return m;
}

}  // namespace

SingularityMargins singularity_check(const AMParams& params, const ExtendedState& q_de) {
  return margins_from(q_de.q.xi.phi, q_de.q.xi.theta, q_de.thrust, thrust_floor(params));
}

SingularityMargins singularity_check(const AMParams& params, const FlatSignal& sigma) {
  const double mt = params.total_mass(), g = params.gravity;
  const Vec3 a = sigma.pe[1] + mt * g * Vec3::UnitZ();
  const double thrust = a.norm();
  if (thrust == 0.0) return margins_from(0.0, kPi / 2.0, 0.0, thrust_floor(params));
  const double sp = std::sin(sigma.psi[0]), cp = std::cos(sigma.psi[0]);
  const double phi = std::asin(std::clamp((a.x() * sp - a.y() * cp) / thrust, -1.0, 1.0));
  const double theta = std::atan2(a.x() * cp + a.y() * sp, a.z());
  return margins_from(phi, theta, thrust, thrust_floor(params));
}

}  // namespace amflat
