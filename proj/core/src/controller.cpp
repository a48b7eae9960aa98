#include "amflat/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amflat {

double Clf::condition() const {
  Eigen::SelfAdjointEigenSolver<MatX> es(P, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
}

Clf Clf::build(int k, std::optional<MatX> Q, std::optional<double> lambda_override) {
  Clf clf;
  clf.brunovsky = brunovsky_matrices(k);
  const Eigen::Index n = clf.brunovsky.F.rows();
  clf.Q = Q.value_or(MatX::Identity(n, n));
  if (clf.Q.rows() != n || clf.Q.cols() != n) {
    throw std::invalid_argument("Clf::build: Q must be (11+2k) x (11+2k)");
  }
  Eigen::SelfAdjointEigenSolver<MatX> qes(clf.Q, Eigen::EigenvaluesOnly);
  if (!(qes.eigenvalues().minCoeff() > 0.0)) {
    throw std::invalid_argument("Clf::build: Q must be positive definite");
  }
  clf.P = solve_care(clf.brunovsky.F, clf.brunovsky.G, clf.Q);
  clf.care_residual = amflat::care_residual(clf.brunovsky.F, clf.brunovsky.G, clf.Q, clf.P);
  Eigen::SelfAdjointEigenSolver<MatX> pes(clf.P, Eigen::EigenvaluesOnly);
  clf.lambda = lambda_override.value_or(qes.eigenvalues().minCoeff() / pes.eigenvalues().maxCoeff());
  return clf;
}

VecX tracking_error(const AMParams& params, const ExtendedState& q_de,
                    const FlatSignal& reference) {
  const int k = params.k();
  const FlatSignal actual = flat_outputs_from_state(params, q_de, ExtendedInput::zero(k));
  VecX h(11 + 2 * k);
  h << actual.pe[0] - reference.pe[0],
       actual.psi[0] - reference.psi[0], actual.eta[0] - reference.eta[0],
       actual.pe[1] - reference.pe[1],
       actual.psi[1] - reference.psi[1], actual.eta[1] - reference.eta[1],
       actual.pe[2] - reference.pe[2];
  return h;
}

ClfValue clf_value_and_derivative(const VecX& h, const Clf& clf, const VecX& w) {
  const MatX& F = clf.brunovsky.F;
  const MatX& G = clf.brunovsky.G;
  const VecX Ph = clf.P * h;
  ClfValue out;
  out.V = h.dot(Ph);
  out.LfV = h.dot((F.transpose() * clf.P + clf.P * F) * h);
  out.LgV = 2.0 * G.transpose() * Ph;
  out.V_dot = out.LfV + out.LgV.dot(w);
  return out;
}

ClfQpResult clf_qp_control(const AMParams& params, const ExtendedState& q_de,
                           const FlatSignal& reference, const Clf& clf,
                           const std::optional<InputBounds>& bounds) {
  const int k = params.k();
  const int m = 4 + k;
  const AuxiliaryDecomposition dec = auxiliary_decomposition(params, q_de);
  const VecX sigma_r = reference.top();

  ClfQpResult out;
  out.decoupling_condition = dec.condition;
  out.h = tracking_error(params, q_de, reference);
  const ClfValue at_zero = clf_value_and_derivative(out.h, clf, VecX::Zero(m));
  out.V = at_zero.V;
  out.LfV = at_zero.LfV;

  // Constraint a . mu <= b in output coordinates.
  const VecX a = from_brunovsky_order(at_zero.LgV);
  const double b = -clf.lambda * out.V - out.LfV;
  const double a_sq = a.squaredNorm();

  out.mu = VecX::Zero(m);
  if (b < 0.0) {
    if (a_sq > 0.0) {
      out.mu = (b / a_sq) * a;
      out.multiplier = -2.0 * b / a_sq;
      out.constraint_active = true;
    } else {
      out.infeasible = true;
    }
  }

  const VecX target = out.mu + sigma_r - dec.f_v;
  VecX u = dec.G_v.partialPivLu().solve(target);
  if (bounds) {
    const VecX clipped = u.cwiseMax(bounds->lower).cwiseMin(bounds->upper);
    out.clipped = (clipped - u).cwiseAbs().maxCoeff() > 0.0;
    u = clipped;
    if (out.clipped) out.mu = dec.f_v + dec.G_v * u - sigma_r;
  }
  out.u = ExtendedInput::from_vector(u, k);

  out.V_dot = out.LfV + a.dot(out.mu);
  out.stationarity_residual = (2.0 * out.mu + out.multiplier * a).norm();
  const double slack = a.dot(out.mu) - b;
  out.complementarity_residual = std::abs(out.multiplier * slack);
  out.primal_residual = std::max(0.0, slack);
  return out;
}

}  // namespace amflat
