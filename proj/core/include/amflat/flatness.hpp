#pragma once

#include <array>

#include "amflat/params.hpp"
#include "amflat/reduced_dynamics.hpp"
#include "amflat/types.hpp"

namespace amflat {

/// Flat output sigma = (p_e, psi, eta) with its derivative stacks.
///
/// p_e = R_eb p is the CoM linear momentum in the earth frame. Index i of
/// each array holds the i-th time derivative; p_e is carried to order 3,
/// psi and eta to order 2.
struct FlatSignal {
  std::array<Vec3, 4> pe{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  std::array<double, 3> psi{0.0, 0.0, 0.0};
  std::array<VecX, 3> eta;

  int k() const { return static_cast<int>(eta[0].size()); }

  /// sigma^(order) for order 0..2 stacked as (p_e, psi, eta), size 4 + k.
  VecX stacked(int order) const;
  /// (p_e^(3), psi^(2), eta^(2)): the relative-degree derivatives.
  VecX top() const;

  static FlatSignal constant(const Vec3& pe, double psi, const VecX& eta);
};

/// Numerical guard on thrust: T_min = 1e-3 m_t g.
double thrust_floor(const AMParams& params);

/// T = |p_e_dot + m_t g e3|. Throws SingularityError(kFreeFall) when the
/// norm does not exceed t_min.
double thrust_from_flat(const Vec3& pe_dot, double total_mass, double gravity,
                        double t_min = 0.0);

struct RollPitch {
  double phi = 0.0;
  double theta = 0.0;
};

/// Roll and pitch from the thrust direction and yaw. Throws
/// SingularityError(kDomain) when the asin argument leaves [-1-1e-9, 1+1e-9]
/// and SingularityError(kAttitude) when |phi| or |theta| >= pi/2 - 1e-6.
RollPitch attitude_from_flat(const Vec3& pe_dot, double psi, double thrust,
                             double total_mass, double gravity);

/// sigma and its derivatives implied by an extended state and input.
/// Orders 0-2 of p_e and 0-1 of psi and eta do not depend on u_de.
FlatSignal flat_outputs_from_state(const AMParams& params, const ExtendedState& q_de,
                                   const ExtendedInput& u_de);

/// Reconstruct q_de from sigma using derivatives up to (p_e'', psi', eta').
ExtendedState state_from_flat(const AMParams& params, const FlatSignal& sigma);

struct FlatInputs {
  ExtendedInput extended;
  ControlInput reduced;
};

/// Inputs realizing sigma, from the torque balance of the momentum and shape
/// equations. Needs the full derivative stack.
FlatInputs inputs_from_flat(const AMParams& params, const FlatSignal& sigma);

/// v(q_de, u_de) = (p_e^(3), psi'', eta'').
VecX auxiliary_input(const AMParams& params, const ExtendedState& q_de,
                     const ExtendedInput& u_de);

/// v = f_v + G_v u_de.
struct AuxiliaryDecomposition {
  VecX f_v;
  MatX G_v;
  double condition = 0.0;
};

/// Built by probing the affine map u_de -> v. Throws
/// SingularityError(kDecoupling) when cond(G_v) > 1e10.
AuxiliaryDecomposition auxiliary_decomposition(const AMParams& params,
                                               const ExtendedState& q_de);

/// Chain-of-integrators form of the error dynamics,
/// h = (e1, e2, e1', e2', e1''), dim 11 + 2k.
struct BrunovskyForm {
  MatX F;
  MatX G;
};

BrunovskyForm brunovsky_matrices(int k);

/// The last 4+k rows of the Brunovsky state are (e2', e1''), so the input
/// that drives them is (psi'', eta'', p_e^(3)). Maps a vector ordered like
/// v = (p_e^(3), psi'', eta'') into that row order.
VecX to_brunovsky_order(const VecX& v);
VecX from_brunovsky_order(const VecX& w);

/// Distance to each excluded configuration.
struct SingularityMargins {
  double attitude = 0.0;   // min(pi/2 - |phi|, pi/2 - |theta|)
  double thrust = 0.0;     // T - T_min
  double cos_product = 0.0;  // |cos(phi) cos(theta)|

  static constexpr double kAttitudeThreshold = 1e-6;

  bool attitude_ok() const { return attitude > kAttitudeThreshold; }
  bool thrust_ok() const { return thrust > 0.0; }
  bool ok() const { return attitude_ok() && thrust_ok(); }
};

SingularityMargins singularity_check(const AMParams& params, const ExtendedState& q_de);
SingularityMargins singularity_check(const AMParams& params, const FlatSignal& sigma);

}  // namespace amflat
