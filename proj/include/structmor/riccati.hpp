#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "structmor/errors.hpp"
#include "structmor/lyapunov.hpp"
#include "structmor/types.hpp"

namespace structmor {
namespace detail {

/// Matrix sign function by the determinant-scaled Newton iteration
/// Z <- (c Z + (c Z)^-1) / 2,  c = |det Z|^(-1/n).
inline Matrix matrix_sign(const Matrix& H, int max_iterations = 120) {
  const Index n = H.rows();
  Matrix Z = H;
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::PartialPivLU<Matrix> lu(Z);
    const double logdet = lu.matrixLU().diagonal().array().abs().log().sum();
    const double ck = std::exp(-logdet / static_cast<double>(n));
    const Matrix Zinv = lu.inverse() / ck;
    const Matrix Znew = 0.5 * (ck * Z + Zinv);
    const double rel = (Znew - Z).norm() / std::max(1.0, Z.norm());
    Z = Znew;
    if (!Z.allFinite())
      throw NumericalError("matrix_sign: iteration diverged (eigenvalues on the imaginary axis?)");
    if (rel < 1e-14) break;
  }
  return Z;
}

}  // namespace detail

/// Stabilizing solution of the positive-real Riccati equation
///   A^T X + X A + (X B - C^T) R^-1 (B^T X - C) = 0,   R = R^T > 0.
///
/// Rewritten with Abar = A - B R^-1 C,  G = B R^-1 B^T,  Q = C^T R^-1 C as
///   Abar^T X + X Abar + X G X + Q = 0,
/// whose stable invariant subspace lives in H = [[Abar, G], [-Q, -Abar^T]]:
/// H [I; X] = [I; X](Abar + G X). The subspace comes from the matrix sign
/// function; Newton refinement (one Lyapunov solve per step) then drives the
/// residual to machine precision.
inline Matrix positive_real_riccati(const Matrix& A, const Matrix& B, const Matrix& C,
                                    const Matrix& R) {
  const Index n = A.rows();
  const Index p = B.cols();
  if (R.rows() != p || R.cols() != p) throw DimensionError("positive_real_riccati: R must be p x p");
  Eigen::LDLT<Matrix> rldlt(symmetrized(R));
  if (rldlt.info() != Eigen::Success || !rldlt.isPositive())
    throw PreconditionError("positive_real_riccati: R = D + D^T must be positive definite");

  const Matrix RinvC = rldlt.solve(C);
  const Matrix RinvBt = rldlt.solve(B.transpose());
  const Matrix Abar = A - B * RinvC;
  const Matrix G = symmetrized(B * RinvBt);
  const Matrix Q = symmetrized(C.transpose() * RinvC);

  Matrix H(2 * n, 2 * n);
  H << Abar, G, -Q, -Abar.transpose();

  const Matrix S = detail::matrix_sign(H);
  const Matrix P = 0.5 * (Matrix::Identity(2 * n, 2 * n) - S);  // stable-subspace projector
  Eigen::BDCSVD<Matrix> svd(P, Eigen::ComputeThinU);
  const Matrix V = svd.matrixU().leftCols(n);
  const Matrix V1 = V.topRows(n);
  const Matrix V2 = V.bottomRows(n);
  Eigen::FullPivLU<Matrix> v1lu(V1.transpose());
  if (!v1lu.isInvertible())
    throw NumericalError("positive_real_riccati: stable subspace has no graph representation");
  Matrix X = symmetrized(v1lu.solve(V2.transpose()).transpose());

  // Newton polish: F(X + D) ~ F(X) + Acl^T D + D Acl with Acl = Abar + G X.
  double best_res = std::numeric_limits<double>::infinity();
  Matrix best_X = X;
  for (int it = 0; it < 12; ++it) {
    const Matrix F = symmetrized(Abar.transpose() * X + X * Abar + X * G * X + Q);
    const double res = F.norm() / (1.0 + X.norm());
    if (res < best_res) {
      best_res = res;
      best_X = X;
    }
    if (res < 1e-14 || !std::isfinite(res)) break;
    const Matrix Acl = Abar + G * X;
    if (!is_hurwitz(Acl)) break;  // keep the best stabilizing iterate
    try {
      X = symmetrized(X + solve_lyapunov(Acl.transpose(), F));
    } catch (const std::exception&) {
      break;
    }
  }
  X = best_X;

  const double final_res =
      (Abar.transpose() * X + X * Abar + X * G * X + Q).norm() / (1.0 + X.norm());
  if (!(final_res < 1e-8)) {
    std::ostringstream os;
    os << "positive_real_riccati: residual " << final_res << " after refinement";
    throw NumericalError(os.str());
  }
  return X;
}

}  // namespace structmor
