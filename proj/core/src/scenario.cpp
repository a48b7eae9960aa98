#include "amflat/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "params_json.hpp"

namespace amflat {

using nlohmann::json;

namespace {

VecX read_vec(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array");
  VecX v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Vec3 read_vec3(const json& j, const std::string& what) {
  const VecX v = read_vec(j, what);
  if (v.size() != 3) throw ConfigError(what + " must have 3 entries");
  return v;
}

// Square matrix, or its diagonal as a flat array.
MatX read_square(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a non-empty array");
  if (!j[0].is_array()) return read_vec(j, what).asDiagonal();
  const auto n = static_cast<Eigen::Index>(j.size());
  MatX m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const VecX row = read_vec(j[r], what);
    if (row.size() != n) throw ConfigError(what + " must be square");
    m.row(r) = row.transpose();
  }
  return m;
}

Polynomial read_channel(const json& j, double duration, const std::string& what) {
  if (j.is_number()) return Polynomial::constant(j.get<double>());
  if (!j.is_object()) throw ConfigError(what + " must be a number or an object");
  const std::string kind = j.value("kind", "const");
  if (kind == "const") return Polynomial::constant(j.at("value").get<double>());
  if (kind == "coeffs") {
    Polynomial p{j.at("coeffs").get<std::vector<double>>()};
    if (p.coeffs.empty()) throw ConfigError(what + ": empty coefficient list");
    return p;
  }
  if (kind == "quintic") {
    return Polynomial::quintic(j.at("from").get<double>(), j.at("to").get<double>(), duration);
  }
  if (kind == "rest_to_rest") {
    return Polynomial::septic(j.at("from").get<double>(), j.at("to").get<double>(), duration);
  }
  if (kind == "bump") {
    return Polynomial::bump(j.at("peak").get<double>(), duration, j.value("offset", 0.0));
  }
  throw ConfigError(what + ": unknown channel kind '" + kind + "'");
}

ReferenceTrajectory read_reference(const json& j) {
  std::vector<ReferenceSegment> segments;
  const json& segs = j.at("segments");
  if (!segs.is_array() || segs.empty()) throw ConfigError("reference.segments must be a non-empty array");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const json& s = segs[i];
    const std::string tag = "reference.segments[" + std::to_string(i) + "]";
    ReferenceSegment seg;
    seg.t0 = s.at("t0").get<double>();
    seg.t1 = s.at("t1").get<double>();
    const double dur = seg.t1 - seg.t0;
    if (!(dur > 0.0)) throw ConfigError(tag + ": t1 must exceed t0");
    const json& pe = s.at("pe");
    if (!pe.is_array() || pe.size() != 3) throw ConfigError(tag + ".pe must have 3 channels");
    for (int c = 0; c < 3; ++c) seg.pe[c] = read_channel(pe[c], dur, tag + ".pe");
    seg.psi = read_channel(s.at("psi"), dur, tag + ".psi");
    const json& eta = s.at("eta");
    if (!eta.is_array()) throw ConfigError(tag + ".eta must be an array");
    for (const auto& c : eta) seg.eta.push_back(read_channel(c, dur, tag + ".eta"));
    segments.push_back(std::move(seg));
  }
  return ReferenceTrajectory(std::move(segments));
}

ExtendedState read_state(const json& j, int k) {
  ExtendedState s{ReducedState::zero(k), 0.0, 0.0};
  s.q.p = read_vec3(j.at("p"), "initial.p");
  s.q.l = read_vec3(j.at("l"), "initial.l");
  s.q.xi = EulerAngles::from(read_vec3(j.at("xi"), "initial.xi"));
  s.q.eta = read_vec(j.at("eta"), "initial.eta");
  s.q.eta_dot = read_vec(j.at("eta_dot"), "initial.eta_dot");
  s.thrust = j.at("thrust").get<double>();
  s.thrust_dot = j.value("thrust_dot", 0.0);
  return s;
}

Scenario read_scenario(const json& j, const std::string& base_dir) {
  Scenario sc;
  if (j.contains("params")) {
    sc.params = params_from_json(j.at("params"));
  } else if (j.contains("params_file")) {
    std::filesystem::path p = j.at("params_file").get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    sc.params = load_params(p.string());
  } else {
    throw ConfigError("scenario needs \"params\" or \"params_file\"");
  }
  const int k = sc.params.k();
  if (j.contains("initial_link_mass")) {
    // Starting masses for a model whose file describes the loaded arm.
    PayloadEvent start{0.0, j.at("initial_link_mass").get<std::vector<double>>()};
    if (static_cast<int>(start.link_mass.size()) != k) throw ConfigError("initial_link_mass needs k entries");
    sc.params = apply_payload(sc.params, start);
  }

  if (j.contains("timing")) {
    const json& t = j.at("timing");
    sc.timing.dt_physics = t.value("dt_physics", sc.timing.dt_physics);
    sc.timing.control_period = t.value("control_period", sc.timing.control_period);
    sc.timing.duration = t.value("duration", sc.timing.duration);
    sc.timing.output_stride = t.value("output_stride", sc.timing.output_stride);
  }

  sc.reference = read_reference(j.at("reference"));

  if (j.contains("initial")) {
    const json& init = j.at("initial");
    if (init.contains("state")) sc.initial_state = read_state(init.at("state"), k);
    if (init.contains("zeta")) sc.initial_zeta = read_vec3(init.at("zeta"), "initial.zeta");
  }

  sc.disturbance.eta = VecX::Zero(k);
  sc.disturbance.eta_dot = VecX::Zero(k);
  if (j.contains("disturbance")) {
    const json& d = j.at("disturbance");
    if (d.contains("p")) sc.disturbance.p = read_vec3(d.at("p"), "disturbance.p");
    if (d.contains("l")) sc.disturbance.l = read_vec3(d.at("l"), "disturbance.l");
    if (d.contains("xi")) sc.disturbance.xi = read_vec3(d.at("xi"), "disturbance.xi");
    if (d.contains("pe")) sc.disturbance.pe = read_vec3(d.at("pe"), "disturbance.pe");
    if (d.contains("eta")) sc.disturbance.eta = read_vec(d.at("eta"), "disturbance.eta");
    if (d.contains("eta_dot")) sc.disturbance.eta_dot = read_vec(d.at("eta_dot"), "disturbance.eta_dot");
    sc.disturbance.thrust = d.value("thrust", 0.0);
    sc.disturbance.thrust_dot = d.value("thrust_dot", 0.0);
  }

  if (j.contains("controller")) {
    const json& c = j.at("controller");
    if (c.contains("Q") && !c.at("Q").is_null()) sc.controller.Q = read_square(c.at("Q"), "controller.Q");
    if (c.contains("lambda") && !c.at("lambda").is_null()) sc.controller.lambda = c.at("lambda").get<double>();
    if (c.contains("bounds") && !c.at("bounds").is_null()) {
      const json& b = c.at("bounds");
      sc.controller.bounds = InputBounds{read_vec(b.at("lower"), "controller.bounds.lower"),
                                         read_vec(b.at("upper"), "controller.bounds.upper")};
    }
  }

  if (j.contains("events")) {
    for (const auto& e : j.at("events")) {
      PayloadEvent ev;
      ev.time = e.at("time").get<double>();
      if (e.contains("link_mass")) {
        ev.link_mass = e.at("link_mass").get<std::vector<double>>();
      } else if (e.contains("link_mass_delta")) {
        // Resolved against the masses in effect before this event.
        const auto delta = e.at("link_mass_delta").get<std::vector<double>>();
        const AMParams before = sc.events.empty() ? sc.params : apply_payload(sc.params, sc.events.back());
        if (static_cast<int>(delta.size()) != k) throw ConfigError("events[].link_mass_delta needs k entries");
        for (int i = 0; i < k; ++i) ev.link_mass.push_back(before.links[i].mass + delta[i]);
      } else {
        throw ConfigError("events[] needs link_mass or link_mass_delta");
      }
      sc.events.push_back(ev);
    }
  }

  const std::string transfer = j.value("payload_transfer", "preserve_velocity");
  if (transfer == "preserve_velocity") {
    sc.transfer = PayloadTransfer::kPreserveVelocity;
  } else if (transfer == "preserve_momentum") {
    sc.transfer = PayloadTransfer::kPreserveMomentum;
  } else {
    throw ConfigError("payload_transfer must be preserve_velocity or preserve_momentum");
  }
  sc.validate();
  return sc;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

int Timing::substeps() const {
  if (!(dt_physics > 0.0) || !(control_period > 0.0) || !(duration > 0.0)) {
    throw ConfigError("timing values must be positive");
  }
  const double ratio = control_period / dt_physics;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
    throw ConfigError("control_period must be an integer multiple of dt_physics");
  }
  return static_cast<int>(rounded);
}

void Scenario::validate() const {
  params.validate();
  const int k = params.k();
  timing.substeps();
  if (timing.output_stride < 1) throw ConfigError("output_stride must be >= 1");
  if (reference.segments().empty()) throw ConfigError("scenario has no reference");
  if (reference.k() != k) throw ConfigError("reference joint count does not match params");
  if (reference.start() > 0.0 || reference.end() < timing.duration - 1e-12) {
    throw ConfigError("reference must cover [0, duration]");
  }
  const auto sized = [k](const VecX& v) { return v.size() == 0 || v.size() == k; };
  if (!sized(disturbance.eta) || !sized(disturbance.eta_dot)) {
    throw ConfigError("disturbance.eta and eta_dot need k entries");
  }
  if (initial_state && initial_state->k() != k) throw ConfigError("initial state has wrong joint count");
  const Eigen::Index n = 11 + 2 * k;
  if (controller.Q && (controller.Q->rows() != n || controller.Q->cols() != n)) {
    throw ConfigError("controller.Q must be (11+2k) x (11+2k)");
  }
  if (controller.bounds) {
    const auto& b = *controller.bounds;
    if (b.lower.size() != 4 + k || b.upper.size() != 4 + k || (b.lower.array() > b.upper.array()).any()) {
      throw ConfigError("controller.bounds need 4+k entries with lower <= upper");
    }
  }
  double last = -1.0;
  for (const auto& e : events) {
    if (static_cast<int>(e.link_mass.size()) != k) throw ConfigError("payload event needs k link masses");
    if (!(e.time > last)) throw ConfigError("payload events must be in increasing time order");
    for (double m : e.link_mass) {
      if (!(m >= 0.0) || !std::isfinite(m)) throw ConfigError("payload event masses must be >= 0");
    }
    last = e.time;
  }
}

AMParams apply_payload(const AMParams& params, const PayloadEvent& event) {
  AMParams out = params;
  for (int i = 0; i < params.k(); ++i) {
    const double old_mass = params.links[i].mass;
    const double new_mass = event.link_mass[i];
    out.links[i].mass = new_mass;
    if (old_mass > 0.0) {
      out.links[i].inertia = params.links[i].inertia * (new_mass / old_mass);
    } else if (new_mass > 0.0) {
      throw ConfigError("cannot scale the inertia of a massless link");
    }
  }
  return out;
}

Scenario scenario_from_json_text(const std::string& text, const std::string& base_dir) {
  const json j = parse(text, "scenario");
  try {
    return read_scenario(j, base_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return scenario_from_json_text(read_file(path), dir.empty() ? "." : dir);
}

ReferenceTrajectory reference_from_json_text(const std::string& text) {
  const json j = parse(text, "reference");
  try {
    return read_reference(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("reference: ") + e.what());
  }
}

}  // namespace amflat
