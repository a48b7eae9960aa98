#include "amflat/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

namespace amflat {

namespace {

void require_finite(const VecX& v, const char* where) {
  if (!v.allFinite()) throw IntegrationError(std::string("non-finite value in ") + where);
}

VecX stacked_sigma(const FlatSignal& s) { return s.stacked(0); }

void append_number(std::string& line, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  line.append(buf, res.ptr);
}

Sample make_sample(const AMParams& params, const Clf& clf, double t, const VecX& x,
                   const ExtendedInput& u, const FlatSignal& sigma_d) {
  const int k = params.k();
  Sample s;
  s.t = t;
  s.q_de = ExtendedState::from_vector(x.head(11 + 2 * k), k);
  s.zeta = x.tail<3>();
  s.u = u;
  s.total_mass = params.total_mass();
  s.margins = singularity_check(params, s.q_de);
  s.energy = energies(params, s.q_de.q, s.zeta);
  s.sigma = stacked_sigma(flat_outputs_from_state(params, s.q_de, u));
  s.sigma_d = stacked_sigma(sigma_d);
  s.h = tracking_error(params, s.q_de, sigma_d);
  const VecX v = auxiliary_input(params, s.q_de, u);
  const ClfValue cv = clf_value_and_derivative(s.h, clf, to_brunovsky_order(v - sigma_d.top()));
  s.V = cv.V;
  s.V_dot = cv.V_dot;
  return s;
}

}  // namespace

VecX integrate_rk4(const Dynamics& f, const VecX& x, const VecX& u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_rk4: dt must be positive");
  const VecX k1 = f(x, u);
  require_finite(k1, "RK4 stage 1");
  const VecX k2 = f(x + 0.5 * dt * k1, u);
  require_finite(k2, "RK4 stage 2");
  const VecX k3 = f(x + 0.5 * dt * k2, u);
  require_finite(k3, "RK4 stage 3");
  const VecX k4 = f(x + dt * k3, u);
  require_finite(k4, "RK4 stage 4");
  VecX next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  require_finite(next, "RK4 result");
  return next;
}

VecX augmented_dynamics(const AMParams& params, const VecX& x, const VecX& u_de) {
  const int k = params.k();
  const int n = 11 + 2 * k;
  const ExtendedState q_de = ExtendedState::from_vector(x.head(n), k);
  const ExtendedInput u = ExtendedInput::from_vector(u_de, k);
  const BodyVelocities vel =
      velocities_from_momenta(params, q_de.q.eta, q_de.q.p, q_de.q.l, q_de.q.eta_dot);
  VecX out(n + 3);
  out.head(n) = extended_dynamics(params, q_de, u);
  const Vec3 zeta = x.tail<3>();
  out.tail<3>() = -vel.omega_b.cross(zeta) + vel.s_dot_b;
  return out;
}

ExtendedState initial_state(const Scenario& scenario) {
  const AMParams& params = scenario.params;
  ExtendedState s = scenario.initial_state
                        ? *scenario.initial_state
                        : state_from_flat(params, scenario.reference.evaluate(0.0));
  const Disturbance& d = scenario.disturbance;
  s.q.xi = EulerAngles::from(s.q.xi.vec() + d.xi);
  s.q.p += d.p + rotation_from_euler(s.q.xi).transpose() * d.pe;
  s.q.l += d.l;
  if (d.eta.size() > 0) s.q.eta += d.eta;
  if (d.eta_dot.size() > 0) s.q.eta_dot += d.eta_dot;
  s.thrust += d.thrust;
  s.thrust_dot += d.thrust_dot;
  return s;
}

ReducedState transfer_state(const AMParams& before, const AMParams& after,
                            const ReducedState& state, PayloadTransfer transfer) {
  if (transfer == PayloadTransfer::kPreserveMomentum) return state;
  const BodyVelocities vel =
      velocities_from_momenta(before, state.eta, state.p, state.l, state.eta_dot);
  const MomentumPair mp =
      momenta_from_velocities(after, state.eta, vel.s_dot_b, vel.omega_b, state.eta_dot);
  ReducedState out = state;
  out.p = mp.p;
  out.l = mp.l;
  return out;
}

Trajectory simulate_closed_loop(const Scenario& scenario) {
  scenario.validate();
  AMParams params = scenario.params;
  const int k = params.k();
  const int n = 11 + 2 * k;
  const Timing& timing = scenario.timing;
  const int substeps = timing.substeps();
  const double dt = timing.dt_physics;
  const long steps = std::lround(timing.duration / dt);

  const Clf clf = Clf::build(k, scenario.controller.Q, scenario.controller.lambda);

  Trajectory traj;
  traj.k = k;
  traj.lambda = clf.lambda;
  traj.clf_condition = clf.condition();
  traj.control_period = timing.control_period;

  VecX x(n + 3);
  ExtendedInput u = ExtendedInput::zero(k);
  std::size_t next_event = 0;
  long step = 0;
  double t = 0.0;
  try {
    x << initial_state(scenario).to_vector(), scenario.initial_zeta;
    const Dynamics rhs = [&params](const VecX& state, const VecX& input) {
      return augmented_dynamics(params, state, input);
    };
    for (; step < steps; ++step) {
      t = static_cast<double>(step) * dt;
      const FlatSignal sigma_d = scenario.reference.evaluate(t);
      if (step % substeps == 0) {
        bool event = false;
        while (next_event < scenario.events.size() &&
               scenario.events[next_event].time <= t + 1e-12) {
          const AMParams after = apply_payload(params, scenario.events[next_event]);
          ExtendedState q_de = ExtendedState::from_vector(x.head(n), k);
          q_de.q = transfer_state(params, after, q_de.q, scenario.transfer);
          x.head(n) = q_de.to_vector();
          params = after;
          event = true;
          ++next_event;
        }
        const ExtendedState q_de = ExtendedState::from_vector(x.head(n), k);
        const ClfQpResult res =
            clf_qp_control(params, q_de, sigma_d, clf, scenario.controller.bounds);
        u = res.u;
        ControlRecord rec;
        rec.t = t;
        rec.V = res.V;
        rec.V_dot = res.V_dot;
        rec.lambda = clf.lambda;
        rec.h_norm = res.h.norm();
        rec.stationarity_residual = res.stationarity_residual;
        rec.complementarity_residual = res.complementarity_residual;
        rec.primal_residual = res.primal_residual;
        rec.decoupling_condition = res.decoupling_condition;
        rec.constraint_active = res.constraint_active;
        rec.clipped = res.clipped;
        rec.infeasible = res.infeasible;
        rec.event = event;
        traj.control.push_back(rec);
      }
      if (step % timing.output_stride == 0) {
        traj.samples.push_back(make_sample(params, clf, t, x, u, sigma_d));
      }

      x = integrate_rk4(rhs, x, u.to_vector(), dt);
      const ExtendedState q_de = ExtendedState::from_vector(x.head(n), k);
      const SingularityMargins margins = singularity_check(params, q_de);
      if (!margins.attitude_ok()) {
        throw SingularityError(SingularityError::Kind::kAttitude,
                               "attitude guard tripped (margin " + std::to_string(margins.attitude) + ")");
      }
      if (!margins.thrust_ok()) {
        throw SingularityError(SingularityError::Kind::kFreeFall,
                               "thrust guard tripped (T = " + std::to_string(q_de.thrust) + ")");
      }
    }
    t = static_cast<double>(steps) * dt;
    traj.samples.push_back(make_sample(params, clf, t, x, u, scenario.reference.evaluate(t)));
    traj.completed = true;
  } catch (const std::exception& e) {
    traj.completed = false;
    traj.diagnostic = "aborted at t = " + std::to_string(static_cast<double>(step + 1) * dt) + ": " + e.what();
  }
  return traj;
}

double discrete_decrease_constant(const Trajectory& traj) {
  double worst = -std::numeric_limits<double>::infinity();
  const double period = traj.control_period;
  for (std::size_t i = 0; i + 1 < traj.control.size(); ++i) {
    const ControlRecord& a = traj.control[i];
    const ControlRecord& b = traj.control[i + 1];
    if (b.event || a.event) continue;
    const double rate = (b.V - a.V) / period + a.lambda * a.V;
    worst = std::max(worst, rate / period);
  }
  return worst;
}

std::vector<std::string> csv_header(int k) {
  std::vector<std::string> h{"t", "p_x", "p_y", "p_z", "l_x", "l_y", "l_z", "phi", "theta", "psi"};
  for (int i = 1; i <= k; ++i) h.push_back("eta_" + std::to_string(i));
  for (int i = 1; i <= k; ++i) h.push_back("eta_dot_" + std::to_string(i));
  h.insert(h.end(), {"T", "T_dot"});
  for (int i = 1; i <= k; ++i) h.push_back("tau_L_" + std::to_string(i));
  h.insert(h.end(), {"T_ddot", "tau_phi", "tau_theta", "tau_psi"});
  for (const char* prefix : {"sigma_", "sigma_d_"}) {
    const std::string p(prefix);
    h.insert(h.end(), {p + "pe_x", p + "pe_y", p + "pe_z", p + "psi"});
    for (int i = 1; i <= k; ++i) h.push_back(p + "eta_" + std::to_string(i));
  }
  h.insert(h.end(), {"h_norm", "V", "Vdot", "margin_attitude", "margin_thrust", "K", "V_AM",
                     "zeta_x", "zeta_y", "zeta_z", "m_total"});
  return h;
}

void write_csv(const Trajectory& traj, std::ostream& out) {
  const auto header = csv_header(traj.k);
  std::string line;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) line += ',';
    line += header[i];
  }
  out << line << '\n';
  for (const Sample& s : traj.samples) {
    line.clear();
    bool first = true;
    auto put = [&](double v) {
      if (!first) line += ',';
      first = false;
      append_number(line, v);
    };
    auto put_vec = [&](const VecX& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) put(v[i]);
    };
    put(s.t);
    put_vec(s.q_de.to_vector());
    put_vec(s.u.to_vector());
    put_vec(s.sigma);
    put_vec(s.sigma_d);
    put(s.h.norm());
    put(s.V);
    put(s.V_dot);
    put(s.margins.attitude);
    put(s.margins.thrust);
    put(s.energy.kinetic);
    put(s.energy.potential);
    put_vec(s.zeta);
    put(s.total_mass);
    out << line << '\n';
  }
}

void write_json_summary(const Trajectory& traj, std::ostream& out) {
  nlohmann::json j;
  j["completed"] = traj.completed;
  j["diagnostic"] = traj.diagnostic;
  j["lambda"] = traj.lambda;
  j["clf_condition"] = traj.clf_condition;
  j["samples"] = traj.samples.size();
  j["control_steps"] = traj.control.size();

  double max_vdot_excess = -std::numeric_limits<double>::infinity();
  double max_stat = 0.0, max_comp = 0.0, max_primal = 0.0, max_cond = 0.0;
  int active = 0, clipped = 0, infeasible = 0, events = 0;
  for (const ControlRecord& r : traj.control) {
    max_vdot_excess = std::max(max_vdot_excess, r.V_dot + r.lambda * r.V);
    max_stat = std::max(max_stat, r.stationarity_residual);
    max_comp = std::max(max_comp, r.complementarity_residual);
    max_primal = std::max(max_primal, r.primal_residual);
    max_cond = std::max(max_cond, r.decoupling_condition);
    active += r.constraint_active;
    clipped += r.clipped;
    infeasible += r.infeasible;
    events += r.event;
  }
  if (!traj.control.empty()) {
    j["max_vdot_plus_lambda_v"] = max_vdot_excess;
    j["discrete_decrease_constant"] = discrete_decrease_constant(traj);
  }
  j["max_kkt"] = {{"stationarity", max_stat}, {"complementarity", max_comp}, {"primal", max_primal}};
  j["max_decoupling_condition"] = max_cond;
  j["active_steps"] = active;
  j["clipped_steps"] = clipped;
  j["infeasible_steps"] = infeasible;
  j["events_applied"] = events;

  if (!traj.samples.empty()) {
    const Sample& last = traj.samples.back();
    const Sample& first = traj.samples.front();
    const VecX err = last.sigma - last.sigma_d;
    j["final_time"] = last.t;
    j["initial_h_norm"] = first.h.norm();
    j["final_h_norm"] = last.h.norm();
    j["final_error"] = {{"pe", {err[0], err[1], err[2]}},
                        {"psi", err[3]},
                        {"eta", std::vector<double>(err.data() + 4, err.data() + err.size())}};
    double min_att = std::numeric_limits<double>::infinity();
    double min_thrust = std::numeric_limits<double>::infinity();
    for (const Sample& s : traj.samples) {
      min_att = std::min(min_att, s.margins.attitude);
      min_thrust = std::min(min_thrust, s.margins.thrust);
    }
    j["min_margin"] = {{"attitude", min_att}, {"thrust", min_thrust}};
  }
  out << j.dump(2) << '\n';
}

}  // namespace amflat
