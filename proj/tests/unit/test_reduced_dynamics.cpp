#include <doctest.h>

#include <cmath>
#include <random>

#include "amflat/mechanism.hpp"
#include "amflat/reduced_dynamics.hpp"
#include "amflat/simulator.hpp"
#include "amflat/spatial.hpp"
#include "test_support.hpp"

using namespace amflat;

namespace {

ReducedState hanging_hover(const AMParams& p) {
  ReducedState s = ReducedState::zero(p.k());
  s.eta[0] = kPi / 2;
  return s;
}

// Zero-input rollout of (q_de, zeta) with RK4; thrust is held at zero.
VecX rollout(const AMParams& p, const ReducedState& s0, double duration, double dt) {
  ExtendedState q;
  q.q = s0;
  VecX x(14 + 2 * p.k());
  x << q.to_vector(), Vec3(0.1, -0.2, 0.3);
  const VecX u = ExtendedInput::zero(p.k()).to_vector();
  const Dynamics f = [&](const VecX& y, const VecX& v) { return augmented_dynamics(p, y, v); };
  const long steps = std::lround(duration / dt);
  for (long i = 0; i < steps; ++i) x = integrate_rk4(f, x, u, dt);
  return x;
}

double total_energy(const AMParams& p, const VecX& x) {
  const int n = 11 + 2 * p.k();
  const ExtendedState q = ExtendedState::from_vector(x.head(n), p.k());
  return energies(p, q.q, x.tail<3>()).total();
}

ReducedState gentle_state(const AMParams& p, std::mt19937_64& rng) {
  ReducedState s = oracle::random_state(p, rng);
  s.l *= 0.1;
  s.eta_dot *= 0.5;
  return s;
}

}  // namespace

TEST_CASE("state and input packing") {
  std::mt19937_64 rng(21);
  const AMParams p = planar_two_link_model();
  const ExtendedState q = test::random_extended_state(p, rng);
  const ExtendedState back = ExtendedState::from_vector(q.to_vector(), 2);
  CHECK((back.to_vector() - q.to_vector()).norm() == 0.0);
  const ExtendedInput u = test::random_extended_input(p, rng);
  CHECK((ExtendedInput::from_vector(u.to_vector(), 2).to_vector() - u.to_vector()).norm() == 0.0);
  CHECK(q.to_vector().size() == 15);
  CHECK(u.to_vector().size() == 6);
  CHECK_THROWS_AS(ReducedState::from_vector(VecX::Zero(5), 2), std::invalid_argument);
}

TEST_CASE("momenta and velocities") {
  const AMParams p = planar_two_link_model();
  const VecX eta(Eigen::Vector2d(0.3, -0.8));
  const MomentumPair zero = momenta_from_velocities(p, eta, Vec3::Zero(), Vec3::Zero(), VecX::Zero(2));
  CHECK(zero.stacked().norm() == 0.0);
  const BodyVelocities rest = velocities_from_momenta(p, eta, Vec3::Zero(), Vec3::Zero(), VecX::Zero(2));
  CHECK(rest.s_dot_b.norm() + rest.omega_b.norm() == 0.0);

  const Vec3 v(0.3, -1.2, 0.5);
  const MomentumPair frozen = momenta_from_velocities(p, eta, v, Vec3::Zero(), VecX::Zero(2));
  CHECK((frozen.p - 4.2 * v).norm() < 1e-12);

  AMParams massless = p;
  for (auto& l : massless.links) {
    l.mass = 0.0;
    l.inertia.setZero();
  }
  const Vec3 pm(1, 2, 3), lm(0.1, -0.2, 0.05);
  const BodyVelocities b = velocities_from_momenta(massless, eta, pm, lm, Eigen::Vector2d(1, -1));
  CHECK((b.s_dot_b - pm / 2.7).norm() < 1e-12);
  CHECK((b.omega_b - p.base_inertia.inverse() * lm).norm() < 1e-12);
}

TEST_CASE("momenta round trip") {
  const AMParams p = planar_two_link_model();
  std::mt19937_64 rng(22);
  for (int i = 0; i < 1000; ++i) {
    const VecX eta = test::uniform_vec(rng, 2, -kPi, kPi);
    const Vec3 v = test::uniform_vec(rng, 3, -3, 3), w = test::uniform_vec(rng, 3, -3, 3);
    const VecX ed = test::uniform_vec(rng, 2, -3, 3);
    const MomentumPair m = momenta_from_velocities(p, eta, v, w, ed);
    const BodyVelocities b = velocities_from_momenta(p, eta, m.p, m.l, ed);
    REQUIRE((b.s_dot_b - v).norm() < 1e-10);
    REQUIRE((b.omega_b - w).norm() < 1e-10);
    const MomentumPair m2 = momenta_from_velocities(p, eta, b.s_dot_b, b.omega_b, ed);
    REQUIRE((m2.stacked() - m.stacked()).norm() < 1e-10);
  }
}

TEST_CASE("hover is an equilibrium") {
  const AMParams p = planar_two_link_model();
  const ReducedState s = hanging_hover(p);
  ControlInput u = ControlInput::zero(2);
  u.thrust = p.total_mass() * p.gravity;
  const MomentumRates r = momentum_dot(p, s, Vec3::UnitZ(), u);
  CHECK(r.p_dot.norm() < 1e-12);
  CHECK(r.l_dot.norm() < 1e-12);
  CHECK(shape_ddot(p, s, Vec3::UnitZ(), u).norm() < 1e-12);
}

TEST_CASE("gravity-balancing joint torques hold a static arm") {
  const AMParams p = planar_two_link_model();
  ReducedState s = ReducedState::zero(2);
  s.eta << 0.4, -0.3;
  ControlInput u = ControlInput::zero(2);
  const GravityTerms g = gravity_terms(p, s.eta, Vec3::UnitZ());
  u.tau_L = g.dV_deta;
  u.thrust = p.total_mass() * p.gravity;
  u.tau_body = -g.tau_l;
  CHECK(shape_ddot(p, s, Vec3::UnitZ(), u).norm() < 1e-12);
  const MomentumRates r = momentum_dot(p, s, Vec3::UnitZ(), u);
  CHECK(r.p_dot.norm() + r.l_dot.norm() < 1e-12);
}

TEST_CASE("single link on a clamped base is a pendulum") {
  const AMParams p = test::single_link_model(1e9);
  const auto& link = p.links[0];
  const double lc = 0.125;
  const double inertia = link.mass * lc * lc + link.inertia(2, 2);
  for (double eta : {-0.9, 0.0, 0.5, 1.4}) {
    for (double tau : {0.0, 0.7}) {
      ReducedState s = ReducedState::zero(1);
      s.eta[0] = eta;
      s.eta_dot[0] = 0.8;
      ControlInput u = ControlInput::zero(1);
      u.tau_L[0] = tau;
      u.thrust = p.total_mass() * p.gravity;
      // Angular momentum of the pinned link about the joint, carried by l.
      s.l = momenta_from_velocities(p, s.eta, Vec3::Zero(), Vec3::Zero(), s.eta_dot).l;
      s.p = momenta_from_velocities(p, s.eta, Vec3::Zero(), Vec3::Zero(), s.eta_dot).p;
      const double expected = (tau + p.gravity * link.mass * lc * std::cos(eta)) / inertia;
      CHECK(shape_ddot(p, s, Vec3::UnitZ(), u)[0] == doctest::Approx(expected).epsilon(1e-6));
    }
  }
}

TEST_CASE("advection") {
  AdvectedPair pair{Vec3(0, 0.6, 0.8), Vec3(1, 2, 3)};
  const AdvectedPair still = advect(Vec3::Zero(), Vec3::Zero(), pair);
  CHECK(still.gamma.norm() + still.zeta.norm() == 0.0);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    const Vec3 w = test::uniform_vec(rng, 3, -5, 5);
    const AdvectedPair d = advect(w, Vec3::Zero(), pair);
    CHECK(std::abs(pair.gamma.dot(d.gamma)) < 1e-14);
  }
}

TEST_CASE("free-fall drift") {
  const AMParams p = planar_two_link_model();
  const ReducedState s = hanging_hover(p);
  const ControlAffine ca = drift_and_actuation(p, s);
  CHECK((ca.f.head<3>() + p.total_mass() * p.gravity * Vec3::UnitZ()).norm() < 1e-12);
  CHECK(ca.f.size() == 13);
  CHECK(ca.G.rows() == 13);
  CHECK(ca.G.cols() == 6);
}

TEST_CASE("drift and actuation reproduce the dynamics") {
  const AMParams p = planar_two_link_model();
  std::mt19937_64 rng(24);
  for (int i = 0; i < 200; ++i) {
    const ReducedState s = oracle::random_state(p, rng);
    const ControlInput u = oracle::random_input(p, rng);
    const ControlAffine ca = drift_and_actuation(p, s);
    const VecX direct = reduced_dynamics(p, s, u);
    CHECK((ca.f + ca.G * u.to_vector() - direct).norm() < 1e-12 * std::max(1.0, direct.norm()));

    // Component pieces.
    const Vec3 gamma = gravity_direction(s.xi);
    const MomentumRates r = momentum_dot(p, s, gamma, u);
    CHECK((direct.head<3>() - r.p_dot).norm() < 1e-12 * std::max(1.0, r.p_dot.norm()));
    CHECK((direct.segment<3>(3) - r.l_dot).norm() < 1e-12 * std::max(1.0, r.l_dot.norm()));
    const VecX eta_ddot = shape_ddot(p, s, gamma, u);
    CHECK((direct.tail(2) - eta_ddot).norm() < 1e-12 * std::max(1.0, eta_ddot.norm()));
    CHECK((direct.segment(9, 2) - s.eta_dot).norm() == 0.0);
  }
}

TEST_CASE("drift and actuation guard the Euler singularity") {
  const AMParams p = planar_two_link_model();
  ReducedState s = hanging_hover(p);
  s.xi.theta = kPi / 2;
  CHECK_THROWS_AS(drift_and_actuation(p, s), SingularityError);
}

TEST_CASE("extended dynamics at hover with constant thrust") {
  const AMParams p = planar_two_link_model();
  ExtendedState q;
  q.q = hanging_hover(p);
  q.thrust = p.total_mass() * p.gravity;
  const VecX d = extended_dynamics(p, q, ExtendedInput::zero(2));
  CHECK(d.norm() < 1e-12);
}

TEST_CASE("energy is conserved without inputs") {
  const AMParams p = planar_two_link_model();
  std::mt19937_64 rng(25);
  for (int i = 0; i < 5; ++i) {
    const ReducedState s = gentle_state(p, rng);
    VecX x0(14 + 2 * p.k());
    ExtendedState q;
    q.q = s;
    x0 << q.to_vector(), Vec3(0.1, -0.2, 0.3);
    const double e0 = total_energy(p, x0);
    const VecX x1 = rollout(p, s, 1.0, 1e-3);
    const double e1 = total_energy(p, x1);
    CHECK(std::abs(e1 - e0) / std::max(std::abs(e0), 1.0) < 1e-5);
  }
}

TEST_CASE("spatial momentum is conserved without gravity") {
  AMParams p = planar_two_link_model();
  p.gravity = 0.0;
  std::mt19937_64 rng(26);
  for (int i = 0; i < 5; ++i) {
    const ReducedState s = gentle_state(p, rng);
    const VecX x1 = rollout(p, s, 1.0, 1e-3);
    const ReducedState s1 = ReducedState::from_vector(x1.head(13), 2);
    const Vec3 before = rotation_from_euler(s.xi) * s.p;
    const Vec3 after = rotation_from_euler(s1.xi) * s1.p;
    CHECK((after - before).norm() < 1e-6);
  }
}
