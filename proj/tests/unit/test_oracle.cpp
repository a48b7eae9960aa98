#include <doctest.h>

#include <cmath>
#include <random>

#include "amflat/oracle.hpp"
#include "amflat/spatial.hpp"
#include "amflat/verify.hpp"
#include "test_support.hpp"

using namespace amflat;

namespace {

// Reduced state and base position zeta stepped together with RK4.
struct ReducedRollout {
  ReducedState state;
  Vec3 zeta;
};

VecX reduced_rhs(const AMParams& p, const VecX& y, const ControlInput& u) {
  const int n = 9 + 2 * p.k();
  const ReducedState s = ReducedState::from_vector(y.head(n), p.k());
  const BodyVelocities v = velocities_from_momenta(p, s.eta, s.p, s.l, s.eta_dot);
  VecX d(n + 3);
  d << reduced_dynamics(p, s, u), advect(v.omega_b, v.s_dot_b, {Vec3::UnitZ(), y.tail<3>()}).zeta;
  return d;
}

VecX full_rhs(const AMParams& p, const VecX& y, const ControlInput& u) {
  const int n = 6 + p.k();
  const oracle::FullCoordinates x{y.head(n), y.tail(n)};
  VecX d(2 * n);
  d << x.q_dot, oracle::full_lagrangian_accel(p, x, u);
  return d;
}

template <class F>
VecX rk4(const F& f, const VecX& y, double dt) {
  const VecX k1 = f(y);
  const VecX k2 = f(y + 0.5 * dt * k1);
  const VecX k3 = f(y + 0.5 * dt * k2);
  const VecX k4 = f(y + dt * k3);
  return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace

TEST_CASE("finite-difference Jacobian") {
  MatX a(2, 3);
  a << 1, -2, 3, 0.5, 4, -1;
  const VecX x = VecX::LinSpaced(3, -1, 1);
  const MatX j = oracle::finite_difference_jacobian([&](const VecX& v) -> VecX { return a * v; }, x, 1e-3);
  CHECK((j - a).norm() < 1e-10);

  auto sine = [](const VecX& v) -> VecX { return v.array().sin().matrix(); };
  const MatX d = oracle::finite_difference_jacobian(sine, VecX::Zero(1), 1e-5);
  CHECK(std::abs(d(0, 0) - 1.0) < 1e-8);

  // Central differences: halving the step quarters the error.
  const VecX x0 = VecX::Constant(1, 0.7);
  const double e1 = std::abs(oracle::finite_difference_jacobian(sine, x0, 1e-2)(0, 0) - std::cos(0.7));
  const double e2 = std::abs(oracle::finite_difference_jacobian(sine, x0, 5e-3)(0, 0) - std::cos(0.7));
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("oracle hover equilibrium") {
  const AMParams p = planar_two_link_model();
  oracle::FullCoordinates x{VecX::Zero(8), VecX::Zero(8)};
  x.q[6] = kPi / 2;
  x.q.head<3>() = Vec3(1.0, -2.0, 5.0);
  ControlInput u = ControlInput::zero(2);
  u.thrust = p.total_mass() * p.gravity;
  CHECK(oracle::full_lagrangian_accel(p, x, u).norm() < 1e-8);
}

TEST_CASE("oracle free fall of a base with a massless arm") {
  AMParams p = planar_two_link_model();
  for (auto& l : p.links) {
    l.mass = 0.0;
    l.inertia.setZero();
  }
  oracle::FullCoordinates x{VecX::Zero(8), VecX::Zero(8)};
  x.q.segment<3>(3) = Vec3(0.2, -0.3, 1.0);
  x.q_dot.head<3>() = Vec3(1.0, 0.5, -0.2);
  x.q_dot.tail<2>() = Eigen::Vector2d(0.3, -0.4);
  const VecX acc = oracle::full_lagrangian_accel(p, x, ControlInput::zero(2));
  CHECK((acc.head<3>() - Vec3(0, 0, -p.gravity)).norm() < 1e-8);
  CHECK(acc.segment<3>(3).norm() < 1e-8);
  CHECK(acc.tail<2>().norm() == 0.0);
}

TEST_CASE("oracle energies agree with the reduced model") {
  const AMParams p = planar_two_link_model();
  std::mt19937_64 rng(51);
  for (int i = 0; i < 50; ++i) {
    const ReducedState s = oracle::random_state(p, rng);
    const Vec3 zeta = test::uniform_vec(rng, 3, -2, 2);
    const oracle::FullCoordinates x = oracle::full_from_reduced(p, s, zeta);
    const Energies e = energies(p, s, zeta);
    CHECK(std::abs(oracle::kinetic_energy(p, x.q, x.q_dot) - e.kinetic) <
          1e-9 * std::max(1.0, e.kinetic));
    CHECK(std::abs(oracle::potential_energy(p, x.q) - e.potential) <
          1e-9 * std::max(1.0, std::abs(e.potential)));
    const ReducedState back = oracle::reduced_from_full(p, x);
    CHECK((back.to_vector() - s.to_vector()).norm() < 1e-10 * std::max(1.0, s.to_vector().norm()));
  }
}

TEST_CASE("oracle accelerations match the reduced dynamics") {
  const AMParams p = planar_two_link_model();
  std::mt19937_64 rng(52);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const ReducedState s = oracle::random_state(p, rng);
    const ControlInput u = oracle::random_input(p, rng);
    const ReducedAccelerations acc = accelerations(evaluate_kinematics(p, s), u);
    const VecX reduced = oracle::full_accel_from_reduced(p, s, acc.x_ddot);
    const VecX full = oracle::full_lagrangian_accel(p, oracle::full_from_reduced(p, s), u);
    worst = std::max(worst, oracle::relative_error(reduced, full));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("oracle trajectory matches a reduced trajectory") {
  const AMParams p = planar_two_link_model();
  std::mt19937_64 rng(53);
  // Slow start and small torques keep the run inside the Euler chart (|theta| < pi/2);
  // the full model uses Euler angles as coordinates and is singular at the boundary.
  ReducedState s0 = oracle::random_state(p, rng);
  const BodyVelocities v0 = velocities_from_momenta(p, s0.eta, s0.p, s0.l, s0.eta_dot);
  s0.eta_dot *= 0.25;
  const MomentumPair m0 =
      momenta_from_velocities(p, s0.eta, 0.25 * v0.s_dot_b, 0.25 * v0.omega_b, s0.eta_dot);
  s0.p = m0.p;
  s0.l = m0.l;
  ControlInput u = oracle::random_input(p, rng);
  u.thrust = p.total_mass() * p.gravity;
  u.tau_body *= 0.1;
  u.tau_L *= 0.1;
  const Vec3 zeta0(0.3, 0.1, -0.2);

  VecX yr(16);
  yr << s0.to_vector(), zeta0;
  const oracle::FullCoordinates x0 = oracle::full_from_reduced(p, s0, zeta0);
  VecX yf(16);
  yf << x0.q, x0.q_dot;

  const double dt = 1e-3;
  for (int i = 0; i < 1000; ++i) {
    yr = rk4([&](const VecX& y) { return reduced_rhs(p, y, u); }, yr, dt);
    yf = rk4([&](const VecX& y) { return full_rhs(p, y, u); }, yf, dt);
  }
  const ReducedState sr = ReducedState::from_vector(yr.head(13), 2);
  const ReducedState sf = oracle::reduced_from_full(p, {yf.head(8), yf.tail(8)});
  CHECK(oracle::relative_error(sf.to_vector(), sr.to_vector()) < 1e-5);
  const Vec3 zeta_f = rotation_from_euler(sf.xi).transpose() * Vec3(yf.head<3>());
  CHECK((zeta_f - yr.tail<3>()).norm() < 1e-5);
}

TEST_CASE("verify suites pass on the planar model") {
  VerifyOptions opt;
  opt.samples = 20;
  const VerifyReport r = run_verify("all", planar_two_link_model(), opt);
  for (const auto& c : r.checks) {
    INFO(c.suite << "/" << c.name << " residual " << c.residual << " tol " << c.tolerance);
    CHECK(c.passed);
  }
  CHECK(r.checks.size() > 10);
  CHECK_THROWS_AS(run_verify("bogus", planar_two_link_model(), opt), std::invalid_argument);
}
