#pragma once

#include <vector>

#include "amflat/flatness.hpp"
#include "amflat/types.hpp"

namespace amflat {

/// Polynomial in local segment time, c[0] + c[1] t + c[2] t^2 + ...
struct Polynomial {
  std::vector<double> coeffs;

  double derivative(double t, int order) const;

  static Polynomial constant(double value);
  /// Degree-5 rest-to-rest blend over [0, duration]; zero rate and
  /// acceleration at both ends.
  static Polynomial quintic(double from, double to, double duration);
  /// Degree-7 rest-to-rest blend; zero derivatives through order 3 at both ends.
  static Polynomial septic(double from, double to, double duration);
  /// offset + peak * 256 s^4 (1 - s)^4 with s = t / duration. Starts and ends
  /// at `offset` with zero derivatives through order 3.
  static Polynomial bump(double peak, double duration, double offset = 0.0);
};

/// Reference for one time window: p_e (x, y, z), psi and each joint angle.
struct ReferenceSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  std::array<Polynomial, 3> pe;
  Polynomial psi;
  std::vector<Polynomial> eta;
};

/// Piecewise-polynomial flat reference sigma_d(t) with analytic derivatives.
class ReferenceTrajectory {
 public:
  ReferenceTrajectory() = default;
  /// Throws ConfigError when segments are not contiguous or the joint
  /// mismatch exceeds 1e-9 (orders 0-3 for p_e, 0-2 for psi and eta).
  explicit ReferenceTrajectory(std::vector<ReferenceSegment> segments);

  /// Throws std::out_of_range outside [start(), end()].
  FlatSignal evaluate(double t) const;

  double start() const;
  double end() const;
  int k() const;
  const std::vector<ReferenceSegment>& segments() const { return segments_; }

  /// Largest derivative mismatch over all segment joints.
  double joint_mismatch() const;

  static ReferenceTrajectory hover(const Vec3& pe, double psi, const VecX& eta, double duration);

 private:
  std::vector<ReferenceSegment> segments_;
};

}  // namespace amflat
