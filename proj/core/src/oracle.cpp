#include "amflat/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "amflat/spatial.hpp"

namespace amflat::oracle {

namespace {

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

Mat4 homogeneous(const Mat3& r, const Vec3& t) {
  Mat4 out = Mat4::Identity();
  out.topLeftCorner<3, 3>() = r;
  out.topRightCorner<3, 1>() = t;
  return out;
}

Mat4 translate_z(double d) {
  Mat4 out = Mat4::Identity();
  out(2, 3) = d;
  return out;
}

Mat4 translate_x(double a) {
  Mat4 out = Mat4::Identity();
  out(0, 3) = a;
  return out;
}

Mat4 rz_hom(double th) {
  Mat4 out = Mat4::Identity();
  out(0, 0) = std::cos(th);
  out(0, 1) = -std::sin(th);
  out(1, 0) = std::sin(th);
  out(1, 1) = std::cos(th);
  return out;
}

Mat4 rz_hom_derivative(double th) {
  Mat4 out = Mat4::Zero();
  out(0, 0) = -std::sin(th);
  out(0, 1) = -std::cos(th);
  out(1, 0) = std::cos(th);
  out(1, 1) = -std::sin(th);
  return out;
}

Mat4 rx_hom(double al) {
  Mat4 out = Mat4::Identity();
  out(1, 1) = std::cos(al);
  out(1, 2) = -std::sin(al);
  out(2, 1) = std::sin(al);
  out(2, 2) = std::cos(al);
  return out;
}

// One rigid body: world pose, its partials w.r.t. each coordinate, and the
// inertial data needed for its kinetic and potential energy.
struct Body {
  double mass = 0.0;
  Vec4 com_local = Vec4(0, 0, 0, 1);
  Mat3 inertia = Mat3::Zero();
  Mat4 pose;
  std::vector<Mat4> partials;
};

std::vector<Body> bodies_at(const AMParams& params, const VecX& q) {
  const int k = params.k();
  const int n = 6 + k;
  if (q.size() != n) throw std::invalid_argument("oracle: coordinate dimension mismatch");
  const EulerAngles xi{q[3], q[4], q[5]};
  const Mat4 base = homogeneous(rotation_from_euler(xi), q.head<3>());

  std::vector<Mat4> base_partials(n, Mat4::Zero());
  for (int a = 0; a < 3; ++a) base_partials[a](a, 3) = 1.0;
  for (int a = 0; a < 3; ++a) {
    base_partials[3 + a].topLeftCorner<3, 3>() = rotation_partial(xi, a);
  }

  std::vector<Body> out;
  Body b0;
  b0.mass = params.base_mass;
  b0.inertia = params.base_inertia;
  b0.pose = base;
  b0.partials = base_partials;
  out.push_back(b0);

  // Link i pose = base * mount * A_1 ... A_i; A_j = Rz(th) Tz(d) Tx(a) Rx(alpha).
  const Mat4 mount = homogeneous(params.mount_rotation, params.mount_offset);
  std::vector<Mat4> factors, factor_partials;
  for (int j = 0; j < k; ++j) {
    const DhRow& dh = params.links[j].dh;
    const double th = q[6 + j] + dh.theta0;
    const Mat4 tail = translate_z(dh.d) * translate_x(dh.a) * rx_hom(dh.alpha);
    factors.push_back(rz_hom(th) * tail);
    factor_partials.push_back(rz_hom_derivative(th) * tail);
  }
  for (int i = 0; i < k; ++i) {
    Body b;
    b.mass = params.links[i].mass;
    b.com_local.head<3>() = params.links[i].com;
    b.inertia = params.links[i].inertia;
    Mat4 chain = mount;
    for (int j = 0; j <= i; ++j) chain = chain * factors[j];
    b.pose = base * chain;
    b.partials.assign(n, Mat4::Zero());
    for (int c = 0; c < 6; ++c) b.partials[c] = base_partials[c] * chain;
    for (int j = 0; j <= i; ++j) {
      Mat4 prod = base * mount;
      for (int m = 0; m <= i; ++m) prod = prod * (m == j ? factor_partials[m] : factors[m]);
      b.partials[6 + j] = prod;
    }
    out.push_back(b);
  }
  return out;
}

double kinetic_from_bodies(const std::vector<Body>& bodies, const VecX& q_dot) {
  double ke = 0.0;
  for (const Body& b : bodies) {
    Mat4 pose_dot = Mat4::Zero();
    for (Eigen::Index c = 0; c < q_dot.size(); ++c) pose_dot += b.partials[c] * q_dot[c];
    const Vec3 v = (pose_dot * b.com_local).head<3>();
    const Mat3 r = b.pose.topLeftCorner<3, 3>();
    const Vec3 w = vee(pose_dot.topLeftCorner<3, 3>() * r.transpose());
    ke += 0.5 * b.mass * v.squaredNorm() + 0.5 * w.dot(r * b.inertia * r.transpose() * w);
  }
  return ke;
}

double potential_from_bodies(const std::vector<Body>& bodies, double g) {
  double pe = 0.0;
  for (const Body& b : bodies) pe += b.mass * g * (b.pose * b.com_local).z();
  return pe;
}

// Conjugate momenta by a unit-step stencil in q_dot, exact for a quadratic.
VecX momenta(const AMParams& params, const VecX& q, const VecX& q_dot) {
  const auto bodies = bodies_at(params, q);
  const Eigen::Index n = q.size();
  VecX pi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    VecX up = q_dot, dn = q_dot;
    up[i] += 1.0;
    dn[i] -= 1.0;
    pi[i] = 0.5 * (kinetic_from_bodies(bodies, up) - kinetic_from_bodies(bodies, dn));
  }
  return pi;
}

}  // namespace

double kinetic_energy(const AMParams& params, const VecX& q, const VecX& q_dot) {
  return kinetic_from_bodies(bodies_at(params, q), q_dot);
}

double potential_energy(const AMParams& params, const VecX& q) {
  return potential_from_bodies(bodies_at(params, q), params.gravity);
}

double lagrangian(const AMParams& params, const VecX& q, const VecX& q_dot) {
  const auto bodies = bodies_at(params, q);
  return kinetic_from_bodies(bodies, q_dot) - potential_from_bodies(bodies, params.gravity);
}

VecX generalized_forces(const AMParams& params, const VecX& q, const ControlInput& input) {
  const int k = params.k();
  const EulerAngles xi{q[3], q[4], q[5]};
  const Mat3 r = rotation_from_euler(xi);
  VecX out = VecX::Zero(6 + k);
  out.head<3>() = r * Vec3::UnitZ() * input.thrust;
  const Vec3 torque_world = r * input.tau_body;
  for (int a = 0; a < 3; ++a) {
    out[3 + a] = torque_world.dot(vee(rotation_partial(xi, a) * r.transpose()));
  }
  out.tail(k) = input.tau_L;
  return out;
}

MatX full_mass_matrix(const AMParams& params, const VecX& q) {
  const auto bodies = bodies_at(params, q);
  const Eigen::Index n = q.size();
  MatX m(n, n);
  auto ke = [&](Eigen::Index i, double si, Eigen::Index j, double sj) {
    VecX v = VecX::Zero(n);
    v[i] += si;
    v[j] += sj;
    return kinetic_from_bodies(bodies, v);
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      m(i, j) = 0.25 * (ke(i, 1, j, 1) - ke(i, 1, j, -1) - ke(i, -1, j, 1) + ke(i, -1, j, -1));
      m(j, i) = m(i, j);
    }
  }
  return m;
}

VecX full_lagrangian_accel(const AMParams& params, const FullCoordinates& x,
                           const ControlInput& input, double step) {
  const Eigen::Index n = x.q.size();
  if (x.q_dot.size() != n) throw std::invalid_argument("oracle: velocity dimension mismatch");
  const MatX m = full_mass_matrix(params, x.q);

  VecX dl_dq(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    VecX up = x.q, dn = x.q;
    up[i] += step;
    dn[i] -= step;
    dl_dq[i] = (lagrangian(params, up, x.q_dot) - lagrangian(params, dn, x.q_dot)) / (2.0 * step);
  }
  const VecX coriolis = (momenta(params, x.q + step * x.q_dot, x.q_dot) -
                         momenta(params, x.q - step * x.q_dot, x.q_dot)) / (2.0 * step);

  // Coordinates carrying no inertia (a massless link) have an identically
  // zero row; they are held at zero acceleration.
  std::vector<Eigen::Index> live;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (m.row(i).cwiseAbs().maxCoeff() > 0.0) live.push_back(i);
  }
  const auto nl = static_cast<Eigen::Index>(live.size());
  MatX ml(nl, nl);
  VecX rhs(nl);
  const VecX full_rhs = generalized_forces(params, x.q, input) + dl_dq - coriolis;
  for (Eigen::Index a = 0; a < nl; ++a) {
    rhs[a] = full_rhs[live[a]];
    for (Eigen::Index b = 0; b < nl; ++b) ml(a, b) = m(live[a], live[b]);
  }

  // Conditioning after Jacobi scaling, so that a very heavy base alone does
  // not count as ill-conditioned.
  if (!(ml.diagonal().minCoeff() > 0.0)) {
    throw SingularityError(SingularityError::Kind::kIllConditioned,
                           "oracle: full mass matrix has a non-positive diagonal");
  }
  const VecX d = ml.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::SelfAdjointEigenSolver<MatX> es(d.asDiagonal() * ml * d.asDiagonal(), Eigen::EigenvaluesOnly);
  const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
  if (!(es.eigenvalues().minCoeff() > 0.0) || cond > 1e12) {
    throw SingularityError(SingularityError::Kind::kIllConditioned,
                           "oracle: full mass matrix is ill-conditioned");
  }
  const VecX sol = ml.ldlt().solve(rhs);
  VecX out = VecX::Zero(n);
  for (Eigen::Index a = 0; a < nl; ++a) out[live[a]] = sol[a];
  return out;
}

MatX finite_difference_jacobian(const std::function<VecX(const VecX&)>& f,
                                const VecX& x, double step) {
  const VecX f0 = f(x);
  MatX jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    VecX up = x, dn = x;
    up[j] += step;
    dn[j] -= step;
    jac.col(j) = (f(up) - f(dn)) / (2.0 * step);
  }
  return jac;
}

FullCoordinates full_from_reduced(const AMParams& params, const ReducedState& state,
                                  const Vec3& zeta) {
  const int k = state.k();
  const BodyVelocities vel =
      velocities_from_momenta(params, state.eta, state.p, state.l, state.eta_dot);
  const Mat3 r = rotation_from_euler(state.xi);
  FullCoordinates out;
  out.q.resize(6 + k);
  out.q_dot.resize(6 + k);
  out.q << r * zeta, state.xi.vec(), state.eta;
  out.q_dot << r * vel.s_dot_b, euler_rate_matrix_inverse(state.xi) * vel.omega_b, state.eta_dot;
  return out;
}

ReducedState reduced_from_full(const AMParams& params, const FullCoordinates& x) {
  const int k = x.k();
  ReducedState s;
  s.xi = EulerAngles{x.q[3], x.q[4], x.q[5]};
  s.eta = x.q.tail(k);
  s.eta_dot = x.q_dot.tail(k);
  const Mat3 r = rotation_from_euler(s.xi);
  const Vec3 s_dot_b = r.transpose() * x.q_dot.head<3>();
  const Vec3 omega_b = euler_rate_matrix(s.xi) * x.q_dot.segment<3>(3);
  const MomentumPair mp = momenta_from_velocities(params, s.eta, s_dot_b, omega_b, s.eta_dot);
  s.p = mp.p;
  s.l = mp.l;
  return s;
}

VecX full_accel_from_reduced(const AMParams& params, const ReducedState& state,
                             const VecX& x_ddot) {
  const int k = state.k();
  const BodyVelocities vel =
      velocities_from_momenta(params, state.eta, state.p, state.l, state.eta_dot);
  const Mat3 r = rotation_from_euler(state.xi);
  const Mat3 xi_inv = euler_rate_matrix_inverse(state.xi);
  const Vec3 xi_dot = xi_inv * vel.omega_b;
  const Vec3 omega_dot = x_ddot.segment<3>(3);
  VecX out(6 + k);
  out << r * (x_ddot.head<3>() + vel.omega_b.cross(vel.s_dot_b)),
      xi_inv * (omega_dot - euler_rate_matrix_dot(state.xi, xi_dot) * xi_dot),
      x_ddot.tail(k);
  return out;
}

ReducedState random_state(const AMParams& params, std::mt19937_64& rng) {
  const int k = params.k();
  std::uniform_real_distribution<double> tilt(-0.6, 0.6), yaw(-kPi, kPi), rate(-2.0, 2.0);
  ReducedState s = ReducedState::zero(k);
  s.xi = EulerAngles{tilt(rng), tilt(rng), yaw(rng)};
  for (int i = 0; i < k; ++i) s.eta[i] = yaw(rng);
  for (int i = 0; i < k; ++i) s.eta_dot[i] = rate(rng);
  const Vec3 s_dot_b(rate(rng), rate(rng), rate(rng));
  const Vec3 omega_b(rate(rng), rate(rng), rate(rng));
  const MomentumPair mp = momenta_from_velocities(params, s.eta, s_dot_b, omega_b, s.eta_dot);
  s.p = mp.p;
  s.l = mp.l;
  return s;
}

ControlInput random_input(const AMParams& params, std::mt19937_64& rng) {
  const int k = params.k();
  const double hover = params.total_mass() * params.gravity;
  std::uniform_real_distribution<double> thrust(0.5 * hover, 1.5 * hover), torque(-1.0, 1.0),
      joint(-2.0, 2.0);
  ControlInput u = ControlInput::zero(k);
  u.thrust = thrust(rng);
  u.tau_body = Vec3(torque(rng), torque(rng), torque(rng));
  for (int i = 0; i < k; ++i) u.tau_L[i] = joint(rng);
  return u;
}

double relative_error(const VecX& a, const VecX& b) {
  return (a - b).norm() / std::max(b.norm(), 1.0);
}

}  // namespace amflat::oracle
