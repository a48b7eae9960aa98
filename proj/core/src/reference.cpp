#include "amflat/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace amflat {

namespace {

constexpr double kJointTolerance = 1e-9;

// Blend with coefficients given in s = t / duration.
Polynomial scaled(const std::vector<double>& in_s, double duration, double gain, double offset) {
  if (!(duration > 0.0)) throw ConfigError("polynomial duration must be positive");
  Polynomial p;
  p.coeffs.resize(in_s.size());
  double scale = 1.0;
  for (std::size_t n = 0; n < in_s.size(); ++n) {
    p.coeffs[n] = gain * in_s[n] / scale;
    scale *= duration;
  }
  p.coeffs[0] += offset;
  return p;
}

}  // namespace

double Polynomial::derivative(double t, int order) const {
  double sum = 0.0;
  double power = 1.0;
  for (std::size_t n = static_cast<std::size_t>(order); n < coeffs.size(); ++n) {
    double falling = 1.0;
    for (int j = 0; j < order; ++j) falling *= static_cast<double>(n - j);
    sum += coeffs[n] * falling * power;
    power *= t;
  }
  return sum;
}

Polynomial Polynomial::constant(double value) { return Polynomial{{value}}; }

Polynomial Polynomial::quintic(double from, double to, double duration) {
  return scaled({0, 0, 0, 10, -15, 6}, duration, to - from, from);
}

Polynomial Polynomial::septic(double from, double to, double duration) {
  return scaled({0, 0, 0, 0, 35, -84, 70, -20}, duration, to - from, from);
}

Polynomial Polynomial::bump(double peak, double duration, double offset) {
  return scaled({0, 0, 0, 0, 256, -1024, 1536, -1024, 256}, duration, peak, offset);
}

ReferenceTrajectory::ReferenceTrajectory(std::vector<ReferenceSegment> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) throw ConfigError("reference needs at least one segment");
  const std::size_t k = segments_.front().eta.size();
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!(s.t1 > s.t0)) throw ConfigError("reference segment " + std::to_string(i) + " has t1 <= t0");
    if (s.eta.size() != k) throw ConfigError("reference segments disagree on joint count");
    if (i > 0 && std::abs(s.t0 - segments_[i - 1].t1) > 1e-12) {
      throw ConfigError("reference segments are not contiguous at segment " + std::to_string(i));
    }
  }
  const double mismatch = joint_mismatch();
  if (mismatch > kJointTolerance) {
    throw ConfigError("reference is not smooth at a segment joint (mismatch " +
                      std::to_string(mismatch) + ")");
  }
}

double ReferenceTrajectory::start() const { return segments_.front().t0; }
double ReferenceTrajectory::end() const { return segments_.back().t1; }
int ReferenceTrajectory::k() const { return static_cast<int>(segments_.front().eta.size()); }

double ReferenceTrajectory::joint_mismatch() const {
  double worst = 0.0;
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    const auto& a = segments_[i - 1];
    const auto& b = segments_[i];
    const double ta = a.t1 - a.t0;
    auto gap = [&](const Polynomial& pa, const Polynomial& pb, int max_order) {
      for (int r = 0; r <= max_order; ++r) {
        worst = std::max(worst, std::abs(pa.derivative(ta, r) - pb.derivative(0.0, r)));
      }
    };
    for (int c = 0; c < 3; ++c) gap(a.pe[c], b.pe[c], 3);
    gap(a.psi, b.psi, 2);
    for (std::size_t j = 0; j < a.eta.size(); ++j) gap(a.eta[j], b.eta[j], 2);
  }
  return worst;
}

FlatSignal ReferenceTrajectory::evaluate(double t) const {
  constexpr double kSlack = 1e-12;
  if (segments_.empty() || t < start() - kSlack || t > end() + kSlack) {
    throw std::out_of_range("reference evaluated at t = " + std::to_string(t) +
                            " outside its time range");
  }
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double value, const ReferenceSegment& s) { return value < s.t0; });
  const ReferenceSegment& seg = (it == segments_.begin()) ? *it : *std::prev(it);
  const double tau = std::clamp(t - seg.t0, 0.0, seg.t1 - seg.t0);
  const int k = this->k();

  FlatSignal out;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 3; ++c) out.pe[r][c] = seg.pe[c].derivative(tau, r);
  }
  for (int r = 0; r < 3; ++r) {
    out.psi[r] = seg.psi.derivative(tau, r);
    out.eta[r].resize(k);
    for (int j = 0; j < k; ++j) out.eta[r][j] = seg.eta[j].derivative(tau, r);
  }
  return out;
}

ReferenceTrajectory ReferenceTrajectory::hover(const Vec3& pe, double psi, const VecX& eta,
                                               double duration) {
  ReferenceSegment s;
  s.t0 = 0.0;
  s.t1 = duration;
  for (int c = 0; c < 3; ++c) s.pe[c] = Polynomial::constant(pe[c]);
  s.psi = Polynomial::constant(psi);
  for (Eigen::Index j = 0; j < eta.size(); ++j) s.eta.push_back(Polynomial::constant(eta[j]));
  return ReferenceTrajectory({s});
}

}  // namespace amflat
