#include "amflat/care.hpp"

#include <cmath>
#include <limits>

namespace amflat {

double care_residual(const MatX& F, const MatX& G, const MatX& Q, const MatX& P) {
  return (F.transpose() * P + P * F - P * G * G.transpose() * P + Q).norm();
}

MatX solve_lyapunov(const MatX& A, const MatX& W) {
  const Eigen::Index n = A.rows();
  const MatX I = MatX::Identity(n, n);
  MatX kron = MatX::Zero(n * n, n * n);
  const MatX At = A.transpose();
  // vec(A^T X) = (I (x) A^T) vec X, vec(X A) = (A^T (x) I) vec X.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      kron.block(i * n, j * n, n, n) += I(i, j) * At + At(i, j) * I;
    }
  }
  const VecX rhs = -Eigen::Map<const VecX>(W.data(), n * n);
  const VecX x = kron.partialPivLu().solve(rhs);
  MatX X = Eigen::Map<const MatX>(x.data(), n, n);
  return 0.5 * (X + X.transpose());
}

namespace {

MatX matrix_sign(MatX Z) {
  const Eigen::Index n = Z.rows();
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::PartialPivLU<MatX> lu(Z);
    const MatX inv = lu.inverse();
    // Determinant scaling, computed in log space.
    double log_det = 0.0;
    const MatX& lu_mat = lu.matrixLU();
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(std::abs(lu_mat(i, i)));
    const double c = std::exp(log_det / static_cast<double>(n));
    const MatX next = 0.5 * (Z / c + c * inv);
    const double change = (next - Z).lpNorm<1>();
    Z = next;
    if (change <= 1e-13 * Z.lpNorm<1>()) break;
  }
  return Z;
}

}  // namespace

MatX solve_care(const MatX& F, const MatX& G, const MatX& Q) {
  const Eigen::Index n = F.rows();
  if (F.cols() != n || G.rows() != n || Q.rows() != n || Q.cols() != n) {
    throw std::invalid_argument("solve_care: dimension mismatch");
  }
  const MatX R = G * G.transpose();
  MatX H(2 * n, 2 * n);
  H << F, -R, -Q, -F.transpose();

  Eigen::EigenSolver<MatX> es(H, false);
  const double scale = std::max(1.0, H.norm());
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()[i].real()) < 1e-8 * scale) {
      throw NoStabilizingSolution("Hamiltonian has eigenvalues on the imaginary axis");
    }
  }

  const MatX W = matrix_sign(H);
  MatX lhs(2 * n, n), rhs(2 * n, n);
  lhs << W.topRightCorner(n, n), W.bottomRightCorner(n, n) + MatX::Identity(n, n);
  rhs << -(W.topLeftCorner(n, n) + MatX::Identity(n, n)), -W.bottomLeftCorner(n, n);
  MatX P = lhs.colPivHouseholderQr().solve(rhs);
  P = 0.5 * (P + P.transpose()).eval();

  // Newton-Kleinman refinement.
  double res = care_residual(F, G, Q, P);
  for (int iter = 0; iter < 20 && res > 1e-14 * std::max(1.0, P.norm()); ++iter) {
    const MatX Ac = F - R * P;
    const MatX next = solve_lyapunov(Ac, Q + P * R * P);
    const double next_res = care_residual(F, G, Q, next);
    if (!(next_res < res)) break;
    P = next;
    res = next_res;
  }

  Eigen::EigenSolver<MatX> closed(F - R * P, false);
  for (Eigen::Index i = 0; i < closed.eigenvalues().size(); ++i) {
    if (!(closed.eigenvalues()[i].real() < 0.0)) {
      throw NoStabilizingSolution("CARE solution does not stabilize the closed loop");
    }
  }
  return P;
}

}  // namespace amflat
