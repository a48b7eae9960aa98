#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace amflat {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Raised when an operation is evaluated at or too close to one of the
/// model's singular configurations (Euler gimbal lock, zero thrust, rank
/// loss of the decoupling matrix).
class SingularityError : public std::runtime_error {
 public:
  enum class Kind {
    kEulerKinematics,
    kFreeFall,
    kAttitude,
    kDomain,
    kDecoupling,
    kIllConditioned,
  };

  SingularityError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Invalid configuration or argument (bad params, malformed scenario file).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace amflat
