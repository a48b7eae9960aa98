#pragma once

#include <optional>
#include <string>
#include <vector>

#include "amflat/controller.hpp"
#include "amflat/params.hpp"
#include "amflat/reduced_dynamics.hpp"
#include "amflat/reference.hpp"

namespace amflat {

/// How momenta are carried across a payload change.
enum class PayloadTransfer {
  kPreserveVelocity,  // recompute (p, l) from the pre-event body velocities
  kPreserveMomentum,  // keep (p, l); velocities jump
};

/// Instantaneous change of link masses. Link inertias scale with the mass
/// ratio; DH geometry and CoM offsets are unchanged.
struct PayloadEvent {
  double time = 0.0;
  std::vector<double> link_mass;
};

/// Additive offsets applied to the initial state.
struct Disturbance {
  Vec3 p = Vec3::Zero();
  Vec3 l = Vec3::Zero();
  Vec3 xi = Vec3::Zero();
  VecX eta;      // empty means zero
  VecX eta_dot;
  /// Offset on p_e = R p, applied as p += R^T pe.
  Vec3 pe = Vec3::Zero();
  double thrust = 0.0;
  double thrust_dot = 0.0;
};

struct ControllerConfig {
  std::optional<MatX> Q;
  std::optional<double> lambda;
  std::optional<InputBounds> bounds;
};

struct Timing {
  double dt_physics = 1e-4;
  double control_period = 1e-3;
  double duration = 1.0;
  /// Record every n-th physics step (the last step is always recorded).
  int output_stride = 1;

  /// control_period / dt_physics, validated to be a positive integer.
  int substeps() const;
};

struct Scenario {
  AMParams params;
  /// When absent the initial state is the reference at t = 0 mapped
  /// through state_from_flat().
  std::optional<ExtendedState> initial_state;
  Vec3 initial_zeta = Vec3::Zero();
  Disturbance disturbance;
  ReferenceTrajectory reference;
  ControllerConfig controller;
  Timing timing;
  std::vector<PayloadEvent> events;
  PayloadTransfer transfer = PayloadTransfer::kPreserveVelocity;

  /// Throws ConfigError on inconsistent dimensions or timing.
  void validate() const;
};

/// Parses a scenario document. `base_dir` resolves a relative "params_file".
Scenario scenario_from_json_text(const std::string& text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

/// Reference trajectory from its JSON description (the "reference" object of
/// a scenario).
ReferenceTrajectory reference_from_json_text(const std::string& text);

/// Parameters after applying a payload event.
AMParams apply_payload(const AMParams& params, const PayloadEvent& event);

}  // namespace amflat
