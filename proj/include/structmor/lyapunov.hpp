#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "structmor/errors.hpp"
#include "structmor/state_space.hpp"
#include "structmor/types.hpp"

namespace structmor {

enum class GramianKind { Controllability, Observability, RequiredSupply, AvailableStorage };

inline const char* gramian_kind_name(GramianKind k) {
  switch (k) {
    case GramianKind::Controllability: return "controllability";
    case GramianKind::Observability: return "observability";
    case GramianKind::RequiredSupply: return "required-supply";
    case GramianKind::AvailableStorage: return "available-storage";
  }
  return "?";
}

/// Symmetric solution of a Lyapunov equation or storage/supply LMI, together
/// with the norm of the defining-equation violation.
struct Gramian {
  Matrix X;
  GramianKind kind = GramianKind::Controllability;
  double residual = 0.0;
};

/// Solve A X + X A^T + W = 0 for Hurwitz A and symmetric W.
///
/// Bartels-Stewart on the complex Schur form of A: with A = U T U^*, the
/// transformed unknown Y = U^* X U satisfies T Y + Y T^* + U^* W U = 0, which
/// is solved by back-substitution over the columns of Y (T upper triangular).
inline Matrix solve_lyapunov(const Matrix& A, const Matrix& W) {
  const Index n = A.rows();
  if (A.rows() != A.cols()) throw DimensionError("solve_lyapunov: A must be square");
  if (W.rows() != n || W.cols() != n) throw DimensionError("solve_lyapunov: W must match A");
  if ((W - W.transpose()).norm() > 1e-10 * (1.0 + W.norm()))
    throw PreconditionError("solve_lyapunov: W must be symmetric");
  const Matrix Ws = symmetrized(W);

  Eigen::ComplexSchur<ComplexMatrix> schur(A.cast<Complex>());
  if (schur.info() != Eigen::Success)
    throw NumericalError("solve_lyapunov: Schur decomposition failed");
  const ComplexMatrix& T = schur.matrixT();
  const ComplexMatrix& U = schur.matrixU();

  const double stab_thr = stability_threshold(A);
  for (Index i = 0; i < n; ++i) {
    if (T(i, i).real() >= stab_thr) {
      std::ostringstream os;
      os << "solve_lyapunov: A is not Hurwitz (eigenvalue " << T(i, i).real();
      if (T(i, i).imag() != 0.0) os << (T(i, i).imag() > 0 ? "+" : "") << T(i, i).imag() << "j";
      os << ")";
      throw PreconditionError(os.str());
    }
  }

  const ComplexMatrix Wt = U.adjoint() * Ws.cast<Complex>() * U;
  ComplexMatrix Y = ComplexMatrix::Zero(n, n);
  for (Index j = n - 1; j >= 0; --j) {
    ComplexVector rhs = -Wt.col(j);
    for (Index k = j + 1; k < n; ++k) rhs -= std::conj(T(j, k)) * Y.col(k);
    ComplexMatrix M = T;
    M.diagonal().array() += std::conj(T(j, j));
    double min_diag = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) min_diag = std::min(min_diag, std::abs(M(i, i)));
    if (min_diag <= 1e-14 * (1.0 + A.norm())) {
      std::ostringstream os;
      os << "solve_lyapunov: near-singular back substitution (pivot " << min_diag
         << ", eigenvalues nearly mirrored across the imaginary axis)";
      throw NumericalError(os.str());
    }
    Y.col(j) = M.triangularView<Eigen::Upper>().solve(rhs);
  }

  Matrix X = symmetrized((U * Y * U.adjoint()).real());
  const double res = (A * X + X * A.transpose() + Ws).norm();
  const double allowed = 1e-10 * (A.norm() * X.norm() + Ws.norm());
  if (!(res <= allowed)) {
    std::ostringstream os;
    os << "solve_lyapunov: residual " << res << " exceeds tolerance " << allowed
       << " (ill-conditioned Lyapunov operator)";
    throw NumericalError(os.str());
  }
  return X;
}

namespace detail {

/// Clamp eigenvalues in [-1e-10*||X||, 0) to zero; larger violations are kept
/// as-is so genuine indefiniteness stays visible.
inline Matrix clamp_gramian_noise(const Matrix& X) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(X);
  const Vector& lam = es.eigenvalues();
  const double floor = -1e-10 * X.norm();
  if (lam.size() == 0 || lam(0) >= 0.0 || lam(0) < floor) return X;
  Vector lc = lam.cwiseMax(0.0);
  return symmetrized(es.eigenvectors() * lc.asDiagonal() * es.eigenvectors().transpose());
}

}  // namespace detail

/// P from  A P + P A^T + B B^T = 0.
inline Gramian controllability_gramian(const StateSpace& sys) {
  sys.check_dimensions();
  const Matrix W = sys.B * sys.B.transpose();
  Matrix X = detail::clamp_gramian_noise(solve_lyapunov(sys.A, W));
  Gramian g;
  g.kind = GramianKind::Controllability;
  g.residual = (sys.A * X + X * sys.A.transpose() + W).norm();
  g.X = std::move(X);
  return g;
}

/// Q from  A^T Q + Q A + C^T C = 0.
inline Gramian observability_gramian(const StateSpace& sys) {
  sys.check_dimensions();
  const Matrix W = sys.C.transpose() * sys.C;
  Matrix X = detail::clamp_gramian_noise(solve_lyapunov(sys.A.transpose(), W));
  Gramian g;
  g.kind = GramianKind::Observability;
  g.residual = (sys.A.transpose() * X + X * sys.A + W).norm();
  g.X = std::move(X);
  return g;
}

}  // namespace structmor
