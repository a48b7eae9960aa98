#pragma once

#include <optional>

#include "amflat/care.hpp"
#include "amflat/flatness.hpp"
#include "amflat/params.hpp"
#include "amflat/reduced_dynamics.hpp"
#include "amflat/types.hpp"

namespace amflat {

/// Quadratic CLF V(h) = h^T P h on the Brunovsky error coordinates, with P
/// from the CARE for (F_B, G_B, Q) and decay rate lambda.
struct Clf {
  BrunovskyForm brunovsky;
  MatX P;
  MatX Q;
  double lambda = 0.0;
  double care_residual = 0.0;

  int k() const { return static_cast<int>(brunovsky.G.cols()) - 4; }
  double condition() const;

  /// Q defaults to the identity of size 11+2k. lambda defaults to
  /// lambda_min(Q) / lambda_max(P).
  static Clf build(int k, std::optional<MatX> Q = std::nullopt,
                   std::optional<double> lambda_override = std::nullopt);
};

/// h = (e1, e2, e1', e2', e1'') with e1 = p_e - p_e,d and
/// e2 = (psi - psi_d, eta - eta_d). Dimension 11 + 2k.
VecX tracking_error(const AMParams& params, const ExtendedState& q_de,
                    const FlatSignal& reference);

/// V, its derivative along h' = F_B h + G_B w, and the Lie derivatives.
/// w is the Brunovsky-ordered input (see to_brunovsky_order()).
struct ClfValue {
  double V = 0.0;
  double V_dot = 0.0;
  double LfV = 0.0;
  VecX LgV;
};

ClfValue clf_value_and_derivative(const VecX& h, const Clf& clf, const VecX& w);

/// Optional box on u_de, applied after the CLF projection.
struct InputBounds {
  VecX lower;
  VecX upper;
};

struct ClfQpResult {
  ExtendedInput u;
  /// mu = v(u) - sigma_d^(r), the decision variable in output coordinates.
  VecX mu;
  VecX h;
  double V = 0.0;
  /// V_dot predicted by the error dynamics at the returned input.
  double V_dot = 0.0;
  double LfV = 0.0;
  double multiplier = 0.0;
  bool constraint_active = false;
  bool infeasible = false;
  bool clipped = false;
  double stationarity_residual = 0.0;
  double complementarity_residual = 0.0;
  double primal_residual = 0.0;
  double decoupling_condition = 0.0;
};

/// Min-norm CLF-QP:
///   min |f_v + G_v u - sigma_d^(r)|^2
///   s.t. LfV + LgV (f_v + G_v u - sigma_d^(r)) <= -lambda V,
/// solved in closed form: the feedback-linearizing input when it satisfies
/// the constraint, else its projection onto the constraint boundary.
ClfQpResult clf_qp_control(const AMParams& params, const ExtendedState& q_de,
                           const FlatSignal& reference, const Clf& clf,
                           const std::optional<InputBounds>& bounds = std::nullopt);

}  // namespace amflat
