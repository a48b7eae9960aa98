#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "amflat/controller.hpp"
#include "amflat/flatness.hpp"
#include "amflat/scenario.hpp"

namespace amflat {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// x_dot = f(x, u).
using Dynamics = std::function<VecX(const VecX& x, const VecX& u)>;

/// One classical RK4 step with u held constant. Throws IntegrationError when
/// a stage or the result is not finite, std::invalid_argument when dt <= 0.
VecX integrate_rk4(const Dynamics& f, const VecX& x, const VecX& u, double dt);

/// Right-hand side on the stacked state (q_de, zeta), zeta = R^T s_eb,
/// dimension 14 + 2k. u is u_de.
VecX augmented_dynamics(const AMParams& params, const VecX& x, const VecX& u_de);

struct Sample {
  double t = 0.0;
  ExtendedState q_de;
  ExtendedInput u;
  Vec3 zeta = Vec3::Zero();
  /// sigma and sigma_d, order 0.
  VecX sigma;
  VecX sigma_d;
  VecX h;
  double V = 0.0;
  /// Instantaneous V_dot along the true dynamics at the held input.
  double V_dot = 0.0;
  SingularityMargins margins;
  Energies energy;
  double total_mass = 0.0;
};

struct ControlRecord {
  double t = 0.0;
  double V = 0.0;
  double V_dot = 0.0;
  double lambda = 0.0;
  double h_norm = 0.0;
  double stationarity_residual = 0.0;
  double complementarity_residual = 0.0;
  double primal_residual = 0.0;
  double decoupling_condition = 0.0;
  bool constraint_active = false;
  bool clipped = false;
  bool infeasible = false;
  /// A payload event was applied at this step.
  bool event = false;
};

struct Trajectory {
  int k = 0;
  double lambda = 0.0;
  double clf_condition = 0.0;
  double control_period = 0.0;
  std::vector<Sample> samples;
  std::vector<ControlRecord> control;
  bool completed = false;
  std::string diagnostic;
};

/// Fixed-step closed loop: CLF-QP evaluated every control_period with the
/// input held in between, RK4 physics at dt_physics, payload events applied
/// at the first control step at or after their time. A guard trip (attitude
/// margin <= 1e-6, thrust at or below T_min, non-finite state) or a
/// singularity raised by the model stops the run; the partial trajectory is
/// returned with completed = false and a diagnostic.
Trajectory simulate_closed_loop(const Scenario& scenario);

/// Initial extended state of a scenario, with the disturbance applied.
ExtendedState initial_state(const Scenario& scenario);

/// Momenta after a parameter change, per the transfer model.
ReducedState transfer_state(const AMParams& before, const AMParams& after,
                            const ReducedState& state, PayloadTransfer transfer);

/// Largest discrete CLF rate excess per control step,
/// max_k [(V_{k+1} - V_k) / T + lambda V_k] / T, skipping steps that
/// straddle a payload event.
double discrete_decrease_constant(const Trajectory& traj);

/// Column names of write_csv(), in order.
std::vector<std::string> csv_header(int k);
void write_csv(const Trajectory& traj, std::ostream& out);
void write_json_summary(const Trajectory& traj, std::ostream& out);

}  // namespace amflat
