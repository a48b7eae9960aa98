#include "amflat/params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "params_json.hpp"
#include "amflat/spatial.hpp"

namespace amflat {

namespace {

void require_psd(const Mat3& m, const std::string& what) {
  if (!m.allFinite()) throw ConfigError(what + " has non-finite entries");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw ConfigError(what + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(m);
  if (es.eigenvalues().minCoeff() < -1e-12) {
    throw ConfigError(what + " is not positive semidefinite");
  }
}

Vec3 read_vec3(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(what + " must be a 3-array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// Accepts a 3x3 nested array or a 3-array diagonal.
Mat3 read_mat3(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(what + " must be 3x3 or a diagonal 3-array");
  if (j[0].is_number()) return read_vec3(j, what).asDiagonal();
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3) throw ConfigError(what + " must be 3x3");
    for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

double AMParams::total_mass() const {
  double m = base_mass;
  for (const auto& link : links) m += link.mass;
  return m;
}

void AMParams::validate() const {
  if (!(base_mass > 0.0) || !std::isfinite(base_mass)) throw ConfigError("base mass must be > 0");
  if (!(gravity > 0.0) || !std::isfinite(gravity)) throw ConfigError("gravity must be > 0");
  if (links.empty()) throw ConfigError("at least one link is required");
  require_psd(base_inertia, "base inertia");
  const Mat3 rtr = mount_rotation.transpose() * mount_rotation;
  if ((rtr - Mat3::Identity()).norm() > 1e-9 || std::abs(mount_rotation.determinant() - 1.0) > 1e-9) {
    throw ConfigError("mount rotation is not a proper rotation");
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto& link = links[i];
    const std::string tag = "link " + std::to_string(i + 1);
    if (!(link.mass >= 0.0) || !std::isfinite(link.mass)) throw ConfigError(tag + " mass must be >= 0");
    if (!link.com.allFinite()) throw ConfigError(tag + " CoM must be finite");
    require_psd(link.inertia, tag + " inertia");
  }
}

Vec3 midpoint_com(const DhRow& dh) {
  // Origin of L_{i-1} expressed in L_i is -(a, d sin(alpha), d cos(alpha)).
  return -0.5 * Vec3(dh.a, dh.d * std::sin(dh.alpha), dh.d * std::cos(dh.alpha));
}

AMParams planar_two_link_model() {
  AMParams p;
  p.base_mass = 2.7;
  p.base_inertia = Vec3(0.029, 0.029, 0.055).asDiagonal();
  // L_0 z axis along y_b, x axis along x_b.
  p.mount_rotation = rot_x(-kPi / 2.0);
  const double lengths[2] = {0.25, 0.2};
  const double masses[2] = {0.5, 1.0};
  for (int i = 0; i < 2; ++i) {
    LinkParams link;
    link.dh = {lengths[i], 0.0, 0.0, 0.0};
    link.mass = masses[i];
    link.com = midpoint_com(link.dh);
    // Slender rod of radius 1.5 cm along x_Li.
    const double r = 0.015, len = lengths[i], m = masses[i];
    link.inertia = Vec3(0.5 * m * r * r, m * (3 * r * r + len * len) / 12.0,
                        m * (3 * r * r + len * len) / 12.0).asDiagonal();
    p.links.push_back(link);
  }
  p.gravity = 9.81;
  return p;
}

AMParams params_from_json(const nlohmann::json& j) {
  try {
    AMParams p;
    const auto& base = j.at("base");
    p.base_mass = base.at("mass").get<double>();
    p.base_inertia = read_mat3(base.at("inertia"), "base.inertia");
    if (base.contains("mount_rpy")) {
      p.mount_rotation = rotation_from_euler(EulerAngles::from(read_vec3(base["mount_rpy"], "base.mount_rpy")));
    }
    if (base.contains("mount_offset")) p.mount_offset = read_vec3(base["mount_offset"], "base.mount_offset");
    for (const auto& jl : j.at("links")) {
      LinkParams link;
      const auto& dh = jl.at("dh");
      if (!dh.is_array() || dh.size() != 4) throw ConfigError("links[i].dh must be [a, alpha, d, theta0]");
      link.dh = {dh[0].get<double>(), dh[1].get<double>(), dh[2].get<double>(), dh[3].get<double>()};
      link.mass = jl.at("mass").get<double>();
      link.com = jl.contains("com") ? read_vec3(jl["com"], "links[i].com") : midpoint_com(link.dh);
      link.inertia = jl.contains("inertia") ? read_mat3(jl["inertia"], "links[i].inertia") : Mat3::Zero();
      p.links.push_back(link);
    }
    p.gravity = j.value("gravity", 9.81);
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
}

AMParams params_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  return params_from_json(j);
}

AMParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open params file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return params_from_json_text(ss.str());
}

}  // namespace amflat
