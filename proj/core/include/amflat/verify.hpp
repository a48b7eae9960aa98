#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "amflat/params.hpp"

namespace amflat {

struct CheckResult {
  std::string suite;
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  void append(const VerifyReport& other);
  /// One line per check: PASS/FAIL, suite/name, residual and tolerance.
  void write_text(std::ostream& out) const;
  void write_json(std::ostream& out) const;
};

struct VerifyOptions {
  int samples = 100;
  std::uint64_t seed = 20240611;
};

/// Reduced dynamics against the finite-difference Lagrangian oracle, energy
/// and potential cross-checks, passivity, the frozen-base 2R self-test and
/// hover equilibrium.
VerifyReport verify_oracle(const AMParams& params, const VerifyOptions& options = {});

/// State/flat round trip, input reproduction, relative-degree probes and
/// decoupling conditioning.
VerifyReport verify_flatness(const AMParams& params, const VerifyOptions& options = {});

/// CARE residuals, the 2x2 closed form, CLF-QP KKT residuals and the
/// feedforward limit at zero error.
VerifyReport verify_controller(const AMParams& params, const VerifyOptions& options = {});

/// suite is "all", "oracle", "flatness" or "controller". Throws
/// std::invalid_argument for anything else.
VerifyReport run_verify(const std::string& suite, const AMParams& params,
                        const VerifyOptions& options = {});

}  // namespace amflat
