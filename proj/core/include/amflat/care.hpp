#pragma once

#include <stdexcept>

#include "amflat/types.hpp"

namespace amflat {

class NoStabilizingSolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stabilizing solution of F^T P + P F - P G G^T P + Q = 0.
///
/// Matrix-sign-function iteration on the Hamiltonian, refined with
/// Newton-Kleinman steps. Throws NoStabilizingSolution when the Hamiltonian
/// has eigenvalues on (or within 1e-8 relative of) the imaginary axis, or
/// when the result does not stabilize F - G G^T P.
MatX solve_care(const MatX& F, const MatX& G, const MatX& Q);

/// Frobenius norm of F^T P + P F - P G G^T P + Q.
double care_residual(const MatX& F, const MatX& G, const MatX& Q, const MatX& P);

/// Solves A^T X + X A = -W (dense Kronecker formulation; sized for the
/// small systems used here).
MatX solve_lyapunov(const MatX& A, const MatX& W);

}  // namespace amflat
