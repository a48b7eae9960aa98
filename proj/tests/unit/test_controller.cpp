#include <doctest.h>

#include <cmath>
#include <random>

#include "amflat/care.hpp"
#include "amflat/controller.hpp"
#include "test_support.hpp"

using namespace amflat;

namespace {

double lambda_min(const MatX& m) {
  return Eigen::SelfAdjointEigenSolver<MatX>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

double lambda_max(const MatX& m) {
  return Eigen::SelfAdjointEigenSolver<MatX>(m, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

// Flat outputs of a random (state, input) pair, perturbed in the orders the
// state determines so that the state is off the reference.
FlatSignal perturbed_reference(const AMParams& p, const ExtendedState& q, std::mt19937_64& rng,
                               double scale) {
  FlatSignal s = flat_outputs_from_state(p, q, test::random_extended_input(p, rng));
  for (int o = 0; o < 3; ++o) s.pe[o] += test::uniform_vec(rng, 3, -scale, scale);
  for (int o = 0; o < 2; ++o) {
    s.psi[o] += test::uniform(rng, -scale, scale);
    s.eta[o] += test::uniform_vec(rng, p.k(), -scale, scale);
  }
  return s;
}

}  // namespace

TEST_CASE("double integrator CARE") {
  MatX f(2, 2), g(2, 1);
  f << 0, 1, 0, 0;
  g << 0, 1;
  const MatX p = solve_care(f, g, MatX::Identity(2, 2));
  MatX expected(2, 2);
  expected << std::sqrt(3.0), 1, 1, std::sqrt(3.0);
  CHECK((p - expected).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(care_residual(f, g, MatX::Identity(2, 2), p) < 1e-12);
}

TEST_CASE("CARE without a stabilizing solution") {
  MatX f = MatX::Zero(2, 2), g = MatX::Zero(2, 1);
  CHECK_THROWS_AS(solve_care(f, g, MatX::Identity(2, 2)), NoStabilizingSolution);
  MatX f1(1, 1), g1 = MatX::Zero(1, 1);
  f1 << 1.0;
  CHECK_THROWS_AS(solve_care(f1, g1, MatX::Identity(1, 1)), NoStabilizingSolution);
}

TEST_CASE("Lyapunov solver") {
  MatX a(3, 3);
  a << -1, 2, 0, 0, -3, 1, 0.5, 0, -2;
  const MatX w = MatX::Identity(3, 3);
  const MatX x = solve_lyapunov(a, w);
  CHECK((a.transpose() * x + x * a + w).norm() < 1e-12);
}

TEST_CASE("CLF for the two-link arm") {
  const Clf clf = Clf::build(2);
  CHECK(clf.P.rows() == 15);
  CHECK(clf.care_residual < 1e-8);
  CHECK((clf.P - clf.P.transpose()).norm() < 1e-12);
  CHECK(lambda_min(clf.P) > 0.0);
  CHECK(clf.lambda == doctest::Approx(1.0 / lambda_max(clf.P)));
  CHECK(clf.k() == 2);
  CHECK(clf.condition() == doctest::Approx(lambda_max(clf.P) / lambda_min(clf.P)));

  CHECK_THROWS_AS(Clf::build(2, MatX::Identity(3, 3)), std::invalid_argument);
  MatX indefinite = MatX::Identity(15, 15);
  indefinite(0, 0) = -1.0;
  CHECK_THROWS_AS(Clf::build(2, indefinite), std::invalid_argument);
}

TEST_CASE("scaling Q re-solves P and the decay rate") {
  const Clf base = Clf::build(2);
  for (double c : {0.1, 4.0, 25.0}) {
    const MatX q = c * MatX::Identity(15, 15);
    const Clf scaled = Clf::build(2, q);
    CHECK(scaled.care_residual < 1e-8 * c);
    CHECK(scaled.lambda == doctest::Approx(c / lambda_max(scaled.P)).epsilon(1e-12));
    // The Riccati solution is not linear in Q.
    CHECK((scaled.P - c * base.P).norm() > 1e-3);
  }
}

TEST_CASE("tracking error") {
  const AMParams p = planar_two_link_model();
  std::mt19937_64 rng(41);
  const ExtendedState q = test::random_extended_state(p, rng);
  const FlatSignal on = flat_outputs_from_state(p, q, ExtendedInput::zero(2));
  CHECK(tracking_error(p, q, on).norm() < 1e-15);

  ExtendedState hover;
  hover.q = ReducedState::zero(2);
  hover.thrust = p.total_mass() * p.gravity;
  FlatSignal ref = FlatSignal::constant(Vec3::Zero(), 0.0, VecX::Zero(2));
  const Vec3 delta(0.1, -0.2, 0.3);
  ref.pe[0] = -delta;
  const VecX h = tracking_error(p, hover, ref);
  CHECK(h.size() == 15);
  CHECK((h.head<3>() - delta).norm() < 1e-15);
  CHECK(h.tail(12).norm() < 1e-12);
}

TEST_CASE("CLF value and derivative") {
  const Clf clf = Clf::build(2);
  const ClfValue zero = clf_value_and_derivative(VecX::Zero(15), clf, VecX::Ones(6));
  CHECK(zero.V == 0.0);
  CHECK(zero.V_dot == 0.0);

  std::mt19937_64 rng(42);
  const MatX& f = clf.brunovsky.F;
  const MatX& g = clf.brunovsky.G;
  for (int i = 0; i < 100; ++i) {
    const VecX h = test::uniform_vec(rng, 15, -1, 1);
    const VecX w = test::uniform_vec(rng, 6, -1, 1);
    const ClfValue val = clf_value_and_derivative(h, clf, w);
    const VecX hd = f * h + g * w;
    const double dt = 1e-6;
    const double fd = ((h + dt * hd).dot(clf.P * (h + dt * hd)) -
                       (h - dt * hd).dot(clf.P * (h - dt * hd))) /
                      (2 * dt);
    CHECK(std::abs(fd - val.V_dot) < 1e-6 * std::max(1.0, std::abs(val.V_dot)));

    // LQR input.
    const VecX lqr = -g.transpose() * clf.P * h;
    const ClfValue v2 = clf_value_and_derivative(h, clf, lqr);
    const double bound = -h.dot(clf.Q * h) - lqr.squaredNorm();
    CHECK(v2.V_dot <= bound + 1e-9);
    CHECK(v2.V_dot <= -clf.lambda * v2.V + 1e-12);
  }
}

TEST_CASE("CLF-QP on the reference returns the flat feedforward") {
  const AMParams p = planar_two_link_model();
  const Clf clf = Clf::build(2);
  std::mt19937_64 rng(43);
  for (int i = 0; i < 50; ++i) {
    const ExtendedState q = test::random_extended_state(p, rng);
    const ExtendedInput u = test::random_extended_input(p, rng);
    const FlatSignal ref = flat_outputs_from_state(p, q, u);
    const ClfQpResult r = clf_qp_control(p, q, ref, clf);
    CHECK(r.V < 1e-20);
    CHECK_FALSE(r.constraint_active);
    const FlatInputs ff = inputs_from_flat(p, ref);
    CHECK((r.u.to_vector() - ff.extended.to_vector()).norm() <
          1e-6 * std::max(1.0, ff.extended.to_vector().norm()));
  }
}

TEST_CASE("CLF-QP inactive and active branches") {
  const AMParams p = planar_two_link_model();
  const Clf clf = Clf::build(2);
  std::mt19937_64 rng(44);
  int inactive = 0, active = 0;
  for (int i = 0; i < 400; ++i) {
    const ExtendedState q = test::random_extended_state(p, rng);
    const FlatSignal ref = perturbed_reference(p, q, rng, 0.3);
    const ClfQpResult r = clf_qp_control(p, q, ref, clf);
    const AuxiliaryDecomposition dec = auxiliary_decomposition(p, q);
    const VecX a = from_brunovsky_order(clf_value_and_derivative(r.h, clf, VecX::Zero(6)).LgV);
    const double b = -clf.lambda * r.V - r.LfV;
    if (!r.constraint_active) {
      ++inactive;
      const VecX fl = dec.G_v.partialPivLu().solve(ref.top() - dec.f_v);
      CHECK((r.u.to_vector() - fl).norm() < 1e-9 * std::max(1.0, fl.norm()));
      CHECK(r.mu.norm() == 0.0);
      CHECK(b >= 0.0);
    } else {
      ++active;
      CHECK(std::abs(a.dot(r.mu) - b) < 1e-9 * std::max(1.0, std::abs(b)));
      CHECK(r.stationarity_residual < 1e-8);
      CHECK(r.multiplier > 0.0);
      // mu realized by the returned input.
      const VecX mu = dec.f_v + dec.G_v * r.u.to_vector() - ref.top();
      CHECK((mu - r.mu).norm() < 1e-8 * std::max(1.0, r.mu.norm()));
    }
    CHECK(r.complementarity_residual < 1e-8 * std::max(1.0, std::abs(b)));
    CHECK(r.primal_residual < 1e-8 * std::max(1.0, std::abs(b)));
    CHECK(r.V_dot <= -clf.lambda * r.V + 1e-8 * std::max(1.0, r.V));
  }
  CHECK(inactive > 10);
  CHECK(active > 10);
}

TEST_CASE("CLF-QP input bounds") {
  const AMParams p = planar_two_link_model();
  const Clf clf = Clf::build(2);
  std::mt19937_64 rng(45);
  const ExtendedState q = test::random_extended_state(p, rng);
  const FlatSignal ref = perturbed_reference(p, q, rng, 0.5);
  const InputBounds box{VecX::Constant(6, -0.01), VecX::Constant(6, 0.01)};
  const ClfQpResult r = clf_qp_control(p, q, ref, clf, box);
  CHECK(r.clipped);
  CHECK(r.u.to_vector().cwiseAbs().maxCoeff() <= 0.01);
}
