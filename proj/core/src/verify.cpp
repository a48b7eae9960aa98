#include "amflat/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "amflat/care.hpp"
#include "amflat/controller.hpp"
#include "amflat/flatness.hpp"
#include "amflat/mechanism.hpp"
#include "amflat/oracle.hpp"
#include "amflat/reduced_dynamics.hpp"

namespace amflat {

namespace {

CheckResult check(const std::string& suite, const std::string& name, double residual,
                  double tolerance) {
  return {suite, name, residual, tolerance, std::isfinite(residual) && residual <= tolerance};
}

ExtendedState random_extended(const AMParams& params, std::mt19937_64& rng) {
  const double hover = params.total_mass() * params.gravity;
  std::uniform_real_distribution<double> thrust(0.6 * hover, 1.4 * hover), rate(-5.0, 5.0);
  ExtendedState s{oracle::random_state(params, rng), 0.0, 0.0};
  s.thrust = thrust(rng);
  s.thrust_dot = rate(rng);
  return s;
}

ExtendedInput random_extended_input(const AMParams& params, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> torque(-1.0, 1.0), joint(-2.0, 2.0), jerk(-20.0, 20.0);
  ExtendedInput u = ExtendedInput::zero(params.k());
  u.thrust_ddot = jerk(rng);
  u.tau_body = Vec3(torque(rng), torque(rng), torque(rng));
  for (int i = 0; i < params.k(); ++i) u.tau_L[i] = joint(rng);
  return u;
}

// Joint accelerations of a planar 2R arm in a vertical plane, with angles
// measured from the horizontal and positive downward rotation.
Eigen::Vector2d two_link_textbook(const AMParams& arm, const Eigen::Vector2d& q,
                                  const Eigen::Vector2d& qd, const Eigen::Vector2d& tau) {
  const double m1 = arm.links[0].mass, m2 = arm.links[1].mass;
  const double l1 = arm.links[0].dh.a;
  const double lc1 = 0.5 * arm.links[0].dh.a, lc2 = 0.5 * arm.links[1].dh.a;
  const double i1 = arm.links[0].inertia(2, 2), i2 = arm.links[1].inertia(2, 2);
  const double g = arm.gravity;
  const double c2 = std::cos(q[1]), s2 = std::sin(q[1]);
  Eigen::Matrix2d m;
  m(0, 0) = m1 * lc1 * lc1 + i1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * c2) + i2;
  m(0, 1) = m2 * (lc2 * lc2 + l1 * lc2 * c2) + i2;
  m(1, 0) = m(0, 1);
  m(1, 1) = m2 * lc2 * lc2 + i2;
  const double h = -m2 * l1 * lc2 * s2;
  const Eigen::Vector2d coriolis(h * (2 * qd[0] * qd[1] + qd[1] * qd[1]), -h * qd[0] * qd[0]);
  const double c1 = std::cos(q[0]), c12 = std::cos(q[0] + q[1]);
  const Eigen::Vector2d gravity(-g * ((m1 * lc1 + m2 * l1) * c1 + m2 * lc2 * c12),
                                -g * m2 * lc2 * c12);
  return m.ldlt().solve(tau - coriolis - gravity);
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

void VerifyReport::append(const VerifyReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

void VerifyReport::write_text(std::ostream& out) const {
  char buf[256];
  for (const CheckResult& c : checks) {
    std::snprintf(buf, sizeof(buf), "%s %s/%s residual=%.3e tol=%.1e\n", c.passed ? "PASS" : "FAIL",
                  c.suite.c_str(), c.name.c_str(), c.residual, c.tolerance);
    out << buf;
  }
  const auto failed = std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; });
  out << (passed() ? "PASS" : "FAIL") << " " << checks.size() - failed << "/" << checks.size()
      << " checks\n";
}

void VerifyReport::write_json(std::ostream& out) const {
  nlohmann::json j;
  j["passed"] = passed();
  j["checks"] = nlohmann::json::array();
  for (const CheckResult& c : checks) {
    j["checks"].push_back({{"suite", c.suite},
                           {"name", c.name},
                           {"residual", c.residual},
                           {"tolerance", c.tolerance},
                           {"passed", c.passed}});
  }
  out << j.dump(2) << '\n';
}

VerifyReport verify_oracle(const AMParams& params, const VerifyOptions& options) {
  const std::string suite = "oracle";
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> pos(-3.0, 3.0);
  double accel = 0.0, kinetic = 0.0, potential = 0.0, passivity = 0.0;
  for (int i = 0; i < options.samples; ++i) {
    const ReducedState s = oracle::random_state(params, rng);
    const ControlInput u = oracle::random_input(params, rng);
    const Vec3 zeta(pos(rng), pos(rng), pos(rng));
    const oracle::FullCoordinates full = oracle::full_from_reduced(params, s, zeta);

    const ReducedKinematics kin = evaluate_kinematics(params, s);
    const VecX reduced = oracle::full_accel_from_reduced(params, s, accelerations(kin, u).x_ddot);
    accel = std::max(accel, oracle::relative_error(reduced, oracle::full_lagrangian_accel(params, full, u)));

    const double ke_ref = oracle::kinetic_energy(params, full.q, full.q_dot);
    kinetic = std::max(kinetic, std::abs(kinetic_energy(kin.mass, kin.x_dot) - ke_ref) / std::max(ke_ref, 1.0));
    const double pe_ref = oracle::potential_energy(params, full.q);
    potential = std::max(potential,
                         std::abs(energies(params, s, zeta).potential - pe_ref) / std::max(std::abs(pe_ref), 1.0));

    const MatX m_dot = mass_matrix_rate(kin.mass_partials, s.eta_dot);
    const MatX c = coriolis_matrix(params, s.eta, kin.x_dot);
    passivity = std::max(passivity, std::abs(kin.x_dot.dot((m_dot - 2.0 * c) * kin.x_dot)));
  }

  VerifyReport r;
  r.checks.push_back(check(suite, "accel_equivalence", accel, 1e-6));
  r.checks.push_back(check(suite, "kinetic_energy", kinetic, 1e-9));
  r.checks.push_back(check(suite, "potential_energy", potential, 1e-9));
  r.checks.push_back(check(suite, "passivity", passivity, 1e-8));

  // Frozen base: base inertia x1e9, thrust balancing total weight.
  AMParams arm = planar_two_link_model();
  arm.base_mass *= 1e9;
  arm.base_inertia *= 1e9;
  std::uniform_real_distribution<double> angle(-kPi, kPi), rate(-2.0, 2.0), torque(-2.0, 2.0);
  double frozen = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector2d q(angle(rng), angle(rng)), qd(rate(rng), rate(rng)), tau(torque(rng), torque(rng));
    oracle::FullCoordinates x{VecX::Zero(8), VecX::Zero(8)};
    x.q.tail<2>() = q;
    x.q_dot.tail<2>() = qd;
    ControlInput u = ControlInput::zero(2);
    u.thrust = arm.total_mass() * arm.gravity;
    u.tau_L = tau;
    const VecX acc = oracle::full_lagrangian_accel(arm, x, u);
    const Eigen::Vector2d ref = two_link_textbook(arm, q, qd, tau);
    frozen = std::max(frozen, (acc.tail<2>() - ref).norm() / std::max(ref.norm(), 1.0));
  }
  r.checks.push_back(check(suite, "frozen_base_2r", frozen, 1e-5));

  // Hover: at rest with the planar arm hanging under the base, thrust = weight.
  const AMParams planar = planar_two_link_model();
  oracle::FullCoordinates hover{VecX::Zero(8), VecX::Zero(8)};
  hover.q[6] = kPi / 2.0;
  ControlInput u = ControlInput::zero(2);
  u.thrust = planar.total_mass() * planar.gravity;
  r.checks.push_back(check(suite, "hover_equilibrium",
                           oracle::full_lagrangian_accel(planar, hover, u).norm(), 1e-8));
  return r;
}

VerifyReport verify_flatness(const AMParams& params, const VerifyOptions& options) {
  const std::string suite = "flatness";
  const int k = params.k();
  std::mt19937_64 rng(options.seed + 1);
  double round_trip = 0.0, inputs = 0.0, probe = 0.0, cond = 0.0;
  constexpr double eps = 1e-6;
  for (int i = 0; i < options.samples; ++i) {
    const ExtendedState q = random_extended(params, rng);
    const ExtendedInput u = random_extended_input(params, rng);
    const FlatSignal sigma = flat_outputs_from_state(params, q, u);
    round_trip = std::max(round_trip,
                          oracle::relative_error(state_from_flat(params, sigma).to_vector(), q.to_vector()));
    inputs = std::max(inputs, oracle::relative_error(inputs_from_flat(params, sigma).extended.to_vector(),
                                                     u.to_vector()));

    // Direction in which the input moves the state; lower-order outputs
    // must not change along it.
    const ExtendedInput u2 = random_extended_input(params, rng);
    const VecX d = extended_dynamics(params, q, u) - extended_dynamics(params, q, u2);
    const VecX qv = q.to_vector();
    const FlatSignal up = flat_outputs_from_state(params, ExtendedState::from_vector(qv + eps * d, k), u);
    const FlatSignal dn = flat_outputs_from_state(params, ExtendedState::from_vector(qv - eps * d, k), u);
    for (int r = 0; r < 2; ++r) probe = std::max(probe, (up.pe[r] - dn.pe[r]).norm() / (2 * eps));
    probe = std::max(probe, std::abs(up.psi[0] - dn.psi[0]) / (2 * eps));
    probe = std::max(probe, (up.eta[0] - dn.eta[0]).norm() / (2 * eps));

    cond = std::max(cond, auxiliary_decomposition(params, q).condition);
  }
  VerifyReport r;
  r.checks.push_back(check(suite, "round_trip", round_trip, 1e-8));
  r.checks.push_back(check(suite, "input_reproduction", inputs, 1e-6));
  r.checks.push_back(check(suite, "relative_degree_probe", probe, 1e-12));
  r.checks.push_back(check(suite, "decoupling_condition", cond, 1e8));
  return r;
}

VerifyReport verify_controller(const AMParams& params, const VerifyOptions& options) {
  const std::string suite = "controller";
  const int k = params.k();
  VerifyReport r;
  const Clf clf = Clf::build(k);
  r.checks.push_back(check(suite, "care_residual", clf.care_residual, 1e-8));
  Eigen::SelfAdjointEigenSolver<MatX> es(clf.P, Eigen::EigenvaluesOnly);
  r.checks.push_back(check(suite, "care_positive_definite", -es.eigenvalues().minCoeff(), 0.0));

  MatX f(2, 2), g(2, 1);
  f << 0, 1, 0, 0;
  g << 0, 1;
  MatX expected(2, 2);
  expected << std::sqrt(3.0), 1.0, 1.0, std::sqrt(3.0);
  const MatX p2 = solve_care(f, g, MatX::Identity(2, 2));
  r.checks.push_back(check(suite, "care_double_integrator", (p2 - expected).cwiseAbs().maxCoeff(), 1e-9));

  std::mt19937_64 rng(options.seed + 2);
  double stationarity = 0.0, complementarity = 0.0, primal = 0.0, feedforward = 0.0;
  for (int i = 0; i < options.samples; ++i) {
    const ExtendedState q = random_extended(params, rng);
    const ExtendedInput u = random_extended_input(params, rng);
    const FlatSignal on_path = flat_outputs_from_state(params, q, u);
    feedforward = std::max(feedforward,
                           oracle::relative_error(clf_qp_control(params, q, on_path, clf).u.to_vector(), u.to_vector()));

    const FlatSignal elsewhere =
        flat_outputs_from_state(params, random_extended(params, rng), random_extended_input(params, rng));
    const ClfQpResult res = clf_qp_control(params, q, elsewhere, clf);
    stationarity = std::max(stationarity, res.stationarity_residual);
    complementarity = std::max(complementarity, res.complementarity_residual);
    primal = std::max(primal, res.primal_residual);
  }
  r.checks.push_back(check(suite, "kkt_stationarity", stationarity, 1e-8));
  r.checks.push_back(check(suite, "kkt_complementarity", complementarity, 1e-8));
  r.checks.push_back(check(suite, "kkt_primal", primal, 1e-8));
  r.checks.push_back(check(suite, "feedforward_at_zero_error", feedforward, 1e-6));
  return r;
}

VerifyReport run_verify(const std::string& suite, const AMParams& params, const VerifyOptions& options) {
  VerifyReport r;
  if (suite == "oracle" || suite == "all") r.append(verify_oracle(params, options));
  if (suite == "flatness" || suite == "all") r.append(verify_flatness(params, options));
  if (suite == "controller" || suite == "all") r.append(verify_controller(params, options));
  if (suite != "all" && suite != "oracle" && suite != "flatness" && suite != "controller") {
    throw std::invalid_argument("unknown verify suite: " + suite);
  }
  return r;
}

}  // namespace amflat
