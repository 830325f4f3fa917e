#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "structmor/errors.hpp"
#include "structmor/types.hpp"

namespace structmor {

/// Continuous-time LTI system  x' = A x + B u,  y = C x + D u.
struct StateSpace {
  Matrix A, B, C, D;

  StateSpace() = default;
  StateSpace(Matrix a, Matrix b, Matrix c, Matrix d)
      : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
    check_dimensions();
  }

  Index order() const { return A.rows(); }
  Index inputs() const { return B.cols(); }
  Index outputs() const { return C.rows(); }
  bool square_io() const { return inputs() == outputs(); }

  void check_dimensions() const {
    if (A.rows() != A.cols()) throw DimensionError("A must be square");
    if (B.rows() != A.rows()) throw DimensionError("B must have as many rows as A");
    if (C.cols() != A.rows()) throw DimensionError("C must have as many columns as A");
    if (D.rows() != C.rows() || D.cols() != B.cols())
      throw DimensionError("D must be outputs x inputs");
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite())
      throw DimensionError("system matrices must be finite");
  }
};

/// Stability margin convention: Re(lambda) < -1e-12*||A||_F counts as stable,
/// so numerically-zero real parts are not misclassified.
inline double stability_threshold(const Matrix& A) { return -1e-12 * A.norm(); }

inline ComplexVector eigenvalues_of(const Matrix& A) {
  return Eigen::EigenSolver<Matrix>(A, /*computeEigenvectors=*/false).eigenvalues();
}

inline bool is_hurwitz(const Matrix& A) {
  const ComplexVector eigs = eigenvalues_of(A);
  const double thr = stability_threshold(A);
  for (Index i = 0; i < eigs.size(); ++i)
    if (eigs[i].real() >= thr) return false;
  return true;
}

namespace detail {

/// Rank of [V, AV, ..., A^{n-1}V] by SVD with tolerance n*eps*sigma_max.
/// A is normalized first: the Krylov span is scale invariant and unnormalized
/// powers of a stiff A overflow the singular-value scale.
inline Index krylov_rank(const Matrix& A, const Matrix& V) {
  const Index n = A.rows();
  if (V.cols() == 0) return 0;
  const Matrix An = A / std::max(1.0, A.norm());
  Matrix K(n, n * V.cols());
  Matrix W = V;
  for (Index k = 0; k < n; ++k) {
    K.middleCols(k * V.cols(), V.cols()) = W;
    if (k + 1 < n) W = An * W;
  }
  Eigen::BDCSVD<Matrix> svd(K);
  const Vector& s = svd.singularValues();
  if (s.size() == 0) return 0;
  const double tol =
      static_cast<double>(n) * std::numeric_limits<double>::epsilon() * s(0);
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++rank;
  return rank;
}

}  // namespace detail

struct ValidationOptions {
  bool require_square = false;
  bool require_minimal = false;
  bool require_stable = false;
};

struct ValidationReport {
  Index order = 0;
  bool square = false;
  bool stable = false;
  bool minimal = false;
  Index controllability_rank = 0;
  Index observability_rank = 0;
  double max_real_eigenvalue = 0.0;
  ComplexVector eigenvalues;
  std::vector<std::string> failures;  // unmet requirements from the options

  bool ok() const { return failures.empty(); }
};

inline ValidationReport validate(const StateSpace& sys, const ValidationOptions& opts = {}) {
  sys.check_dimensions();
  ValidationReport rep;
  rep.order = sys.order();
  rep.square = sys.square_io();
  rep.eigenvalues = eigenvalues_of(sys.A);
  rep.max_real_eigenvalue = rep.eigenvalues.size() > 0
                                ? rep.eigenvalues.real().maxCoeff()
                                : -std::numeric_limits<double>::infinity();
  rep.stable = rep.max_real_eigenvalue < stability_threshold(sys.A);
  rep.controllability_rank = detail::krylov_rank(sys.A, sys.B);
  rep.observability_rank = detail::krylov_rank(sys.A.transpose(), sys.C.transpose());
  rep.minimal = rep.controllability_rank == rep.order && rep.observability_rank == rep.order;

  if (opts.require_square && !rep.square)
    rep.failures.push_back("system is not square (outputs != inputs)");
  if (opts.require_stable && !rep.stable) {
    std::ostringstream os;
    os << "system is not asymptotically stable (max Re(lambda) = " << rep.max_real_eigenvalue << ")";
    rep.failures.push_back(os.str());
  }
  if (opts.require_minimal && !rep.minimal) {
    std::ostringstream os;
    os << "system is not minimal (controllability rank " << rep.controllability_rank
       << ", observability rank " << rep.observability_rank << ", order " << rep.order << ")";
    rep.failures.push_back(os.str());
  }
  return rep;
}

/// validate() and throw if the requirements are not met.
inline ValidationReport require_valid(const StateSpace& sys, const ValidationOptions& opts,
                                      const std::string& context) {
  ValidationReport rep = validate(sys, opts);
  if (!rep.ok()) {
    std::string what = context + ":";
    for (const auto& f : rep.failures) what += " " + f + ";";
    throw PreconditionError(what);
  }
  return rep;
}

/// (T A T^-1, T B, C T^-1, D); the transfer function is invariant.
inline StateSpace similarity_transform(const StateSpace& sys, const Matrix& T,
                                       double condition_limit = 1e12) {
  if (T.rows() != T.cols() || T.rows() != sys.order())
    throw DimensionError("transformation matrix must be n x n");
  Eigen::JacobiSVD<Matrix> svd(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!std::isfinite(cond) || cond > condition_limit) {
    std::ostringstream os;
    os << "transformation is singular or ill conditioned (condition estimate " << cond << ")";
    throw PreconditionError(os.str());
  }
  const Matrix T_inv = svd.solve(Matrix::Identity(T.rows(), T.cols()));
  return StateSpace(T * sys.A * T_inv, T * sys.B, sys.C * T_inv, sys.D);
}

/// (A^T, C^T, B^T, D^T). Involution; swaps the controllability and
/// observability structure of a square system.
inline StateSpace dual_system(const StateSpace& sys) {
  if (!sys.square_io()) throw DimensionError("dual requires a square system");
  return StateSpace(sys.A.transpose(), sys.C.transpose(), sys.B.transpose(), sys.D.transpose());
}

struct TransferSample {
  double omega = 0.0;
  ComplexMatrix G;
  bool valid = true;  // false when j*omega is (numerically) an eigenvalue of A
};

/// G(j*omega) = C (j*omega I - A)^-1 B + D via a complex LU solve per frequency.
inline std::vector<TransferSample> frequency_response(const StateSpace& sys,
                                                      const std::vector<double>& omegas) {
  sys.check_dimensions();
  const Index n = sys.order();
  const ComplexVector eigs = eigenvalues_of(sys.A);
  const double singular_tol = 1e-10 * std::max(1.0, sys.A.norm());
  const ComplexMatrix Ac = sys.A.cast<Complex>();
  const ComplexMatrix Bc = sys.B.cast<Complex>();

  std::vector<TransferSample> out;
  out.reserve(omegas.size());
  for (double w : omegas) {
    TransferSample smp;
    smp.omega = w;
    double dist = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < eigs.size(); ++i)
      dist = std::min(dist, std::abs(Complex(0.0, w) - eigs[i]));
    if (w < 0.0 || dist <= singular_tol) {
      smp.valid = false;
      smp.G = ComplexMatrix::Constant(sys.outputs(), sys.inputs(),
                                      Complex(std::numeric_limits<double>::quiet_NaN(), 0.0));
      out.push_back(std::move(smp));
      continue;
    }
    ComplexMatrix M = ComplexMatrix::Identity(n, n) * Complex(0.0, w) - Ac;
    smp.G = sys.C.cast<Complex>() * M.partialPivLu().solve(Bc) + sys.D.cast<Complex>();
    smp.valid = smp.G.allFinite();
    out.push_back(std::move(smp));
  }
  return out;
}

/// Convenience single-frequency evaluation.
inline ComplexMatrix transfer_at(const StateSpace& sys, double omega) {
  return frequency_response(sys, {omega}).front().G;
}

struct StepResponse {
  Vector t;   // sample instants, 0, dt, 2dt, ...
  Matrix y;   // one row per instant, one column per output
};

/// Unit step on one input channel from zero initial state. Discretization is
/// the exact zero-order hold: exp([[A,b],[0,0]]*dt) yields (Ad, bd).
inline StepResponse step_response(const StateSpace& sys, double dt, double t_end,
                                  Index input_channel = 0) {
  sys.check_dimensions();
  if (!(dt > 0.0)) throw PreconditionError("step_response: dt must be positive");
  if (!(t_end > dt)) throw PreconditionError("step_response: t_end must exceed dt");
  if (input_channel < 0 || input_channel >= sys.inputs())
    throw DimensionError("step_response: input channel out of range");

  const Index n = sys.order();
  Matrix aug = Matrix::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = sys.A;
  aug.topRightCorner(n, 1) = sys.B.col(input_channel);
  const Matrix E = (aug * dt).exp();
  const Matrix Ad = E.topLeftCorner(n, n);
  const Vector bd = E.topRightCorner(n, 1);
  const Vector d = sys.D.col(input_channel);

  const Index steps = static_cast<Index>(std::floor(t_end / dt + 1e-9)) + 1;
  StepResponse resp;
  resp.t.resize(steps);
  resp.y.resize(steps, sys.outputs());
  Vector x = Vector::Zero(n);
  for (Index k = 0; k < steps; ++k) {
    resp.t(k) = static_cast<double>(k) * dt;
    resp.y.row(k) = (sys.C * x + d).transpose();
    x = Ad * x + bd;
  }
  return resp;
}

}  // namespace structmor
