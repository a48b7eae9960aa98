#include "amflat/mechanism.hpp"

#include <cmath>
#include <stdexcept>

#include "amflat/spatial.hpp"

namespace amflat {

namespace {

void check_eta(const AMParams& params, const VecX& eta) {
  if (eta.size() != params.k()) {
    throw std::invalid_argument("joint vector size does not match link count");
  }
}

}  // namespace

std::vector<LinkFrame> forward_kinematics(const AMParams& params, const VecX& eta) {
  check_eta(params, eta);
  std::vector<LinkFrame> frames;
  frames.reserve(params.links.size());
  Mat3 rot = params.mount_rotation;
  Vec3 origin = params.mount_offset;
  for (int i = 0; i < params.k(); ++i) {
    const auto& link = params.links[i];
    LinkFrame f;
    f.joint_axis = rot.col(2);
    f.joint_origin = origin;
    const double th = eta[i] + link.dh.theta0;
    const Vec3 local(link.dh.a * std::cos(th), link.dh.a * std::sin(th), link.dh.d);
    origin = origin + rot * local;
    rot = rot * rot_z(th) * rot_x(link.dh.alpha);
    f.origin = origin;
    f.rotation = rot;
    f.com = origin + rot * link.com;
    frames.push_back(f);
  }
  return frames;
}

ManipCoM manipulator_com(const AMParams& params, const VecX& eta) {
  const auto frames = forward_kinematics(params, eta);
  const int k = params.k();
  ManipCoM out;
  out.d_delta.setZero(3, k);
  for (int i = 0; i < k; ++i) {
    const double m = params.links[i].mass;
    out.delta += m * frames[i].com;
    for (int j = 0; j <= i; ++j) {
      out.d_delta.col(j) += m * frames[j].joint_axis.cross(frames[i].com - frames[j].joint_origin);
    }
  }
  return out;
}

MassMatrix mass_matrix(const AMParams& params, const VecX& eta) {
  const auto frames = forward_kinematics(params, eta);
  const int k = params.k();
  const int n = 6 + k;
  MassMatrix out;
  out.m.setZero(n, n);
  out.m.block<3, 3>(0, 0) = params.base_mass * Mat3::Identity();
  out.m.block<3, 3>(3, 3) = params.base_inertia;

  MatX lin(3, n), ang(3, n);
  for (int i = 0; i < k; ++i) {
    const auto& link = params.links[i];
    const auto& f = frames[i];
    // CoM velocity in B: s_dot_b + omega x c + Jc eta_dot.
    lin.setZero();
    lin.block<3, 3>(0, 0).setIdentity();
    lin.block<3, 3>(0, 3) = -skew(f.com);
    // Link angular velocity in B: omega + Jw eta_dot.
    ang.setZero();
    ang.block<3, 3>(0, 3).setIdentity();
    for (int j = 0; j <= i; ++j) {
      lin.col(6 + j) = frames[j].joint_axis.cross(f.com - frames[j].joint_origin);
      ang.col(6 + j) = frames[j].joint_axis;
    }
    const Mat3 inertia_b = f.rotation * link.inertia * f.rotation.transpose();
    out.m.noalias() += link.mass * lin.transpose() * lin;
    out.m.noalias() += ang.transpose() * inertia_b * ang;
  }
  // Exact symmetry; the sums above are symmetric up to rounding.
  out.m = 0.5 * (out.m + out.m.transpose()).eval();
  return out;
}

std::vector<MatX> mass_matrix_partials(const AMParams& params, const VecX& eta, double step) {
  check_eta(params, eta);
  std::vector<MatX> partials;
  partials.reserve(params.links.size());
  VecX e = eta;
  const auto at = [&](int j, double offset) {
    e[j] = eta[j] + offset;
    MatX m = mass_matrix(params, e).m;
    e[j] = eta[j];
    return m;
  };
  for (int j = 0; j < params.k(); ++j) {
    partials.push_back((at(j, -2 * step) - 8.0 * at(j, -step) + 8.0 * at(j, step) - at(j, 2 * step)) /
                       (12.0 * step));
  }
  return partials;
}

MatX mass_matrix_rate(const std::vector<MatX>& partials, const VecX& eta_dot) {
  const Eigen::Index n = partials.empty() ? 6 : partials.front().rows();
  MatX rate = MatX::Zero(n, n);
  for (std::size_t j = 0; j < partials.size(); ++j) rate += partials[j] * eta_dot[j];
  return rate;
}

MatX christoffel_coriolis(const std::vector<MatX>& partials, const VecX& x_dot) {
  const Eigen::Index n = x_dot.size();
  const Eigen::Index k = static_cast<Eigen::Index>(partials.size());
  if (n != 6 + k) throw std::invalid_argument("christoffel_coriolis: dimension mismatch");
  // dM/dx_i vanishes for the six group coordinates.
  auto dM = [&](Eigen::Index i) -> const MatX* { return i < 6 ? nullptr : &partials[i - 6]; };
  MatX c = MatX::Zero(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double term = 0.0;
        if (const MatX* di = dM(i)) term += (*di)(p, j);
        if (const MatX* dj = dM(j)) term += (*dj)(p, i);
        if (const MatX* dp = dM(p)) term -= (*dp)(i, j);
        sum += 0.5 * term * x_dot[i];
      }
      c(p, j) = sum;
    }
  }
  return c;
}

MatX se3_coriolis(const MassMatrix& mass, const VecX& x_dot) {
  const Eigen::Index n = x_dot.size();
  const VecX mom = mass.m.topRows(6) * x_dot;
  const Vec3 p = mom.head<3>();
  const Vec3 l = mom.tail<3>();
  MatX c = MatX::Zero(n, n);
  c.block<3, 3>(0, 3) = -skew(p);
  c.block<3, 3>(3, 0) = -skew(p);
  c.block<3, 3>(3, 3) = -skew(l);
  return c;
}

MatX coriolis_matrix(const MassMatrix& mass, const std::vector<MatX>& partials,
                     const VecX& x_dot) {
  return christoffel_coriolis(partials, x_dot) + se3_coriolis(mass, x_dot);
}

MatX coriolis_matrix(const AMParams& params, const VecX& eta, const VecX& x_dot) {
  return coriolis_matrix(mass_matrix(params, eta), mass_matrix_partials(params, eta), x_dot);
}

VecX GravityTerms::generalized() const {
  VecX d(6 + dV_deta.size());
  d << -tau_p, -tau_l, dV_deta;
  return d;
}

GravityTerms gravity_terms(const AMParams& params, const ManipCoM& com, const Vec3& gamma) {
  if (std::abs(gamma.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("gravity_terms: gamma must be a unit vector");
  }
  const double g = params.gravity;
  GravityTerms out;
  out.tau_p = -g * params.total_mass() * gamma;
  // Moment about O_b of the weights m_i g (-gamma) acting at the link CoMs.
  out.tau_l = g * skew(gamma) * com.delta;
  out.dV_deta = g * com.d_delta.transpose() * gamma;
  return out;
}

GravityTerms gravity_terms(const AMParams& params, const VecX& eta, const Vec3& gamma) {
  return gravity_terms(params, manipulator_com(params, eta), gamma);
}

double kinetic_energy(const MassMatrix& mass, const VecX& x_dot) {
  return 0.5 * x_dot.dot(mass.m * x_dot);
}

double potential_energy(const AMParams& params, const VecX& eta, const Vec3& gamma,
                        const Vec3& zeta) {
  const ManipCoM com = manipulator_com(params, eta);
  return params.gravity * (params.total_mass() * gamma.dot(zeta) + gamma.dot(com.delta));
}

}  // namespace amflat
