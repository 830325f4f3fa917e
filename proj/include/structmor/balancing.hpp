#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "structmor/certificate.hpp"
#include "structmor/errors.hpp"
#include "structmor/state_space.hpp"
#include "structmor/types.hpp"

namespace structmor {

struct BalancingResult {
  Matrix T, T_inv;
  Vector gamma;  // nonincreasing, positive
  std::vector<std::string> warnings;
};

namespace detail {

/// Upper factor R with X = R^T R. Eigenvalues are clamped at 1e-12*lambda_max
/// before factorization; values at/below the floor are an error unless the
/// caller opted into clamping (interconnected Gramian blocks carry noise).
inline Matrix spd_upper_factor(const Matrix& X, const char* label, bool allow_clamp,
                               std::vector<std::string>* warnings) {
  if (X.rows() != X.cols()) throw DimensionError(std::string(label) + " must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(X));
  const Vector& lam = es.eigenvalues();
  const double lmax = lam(lam.size() - 1);
  if (!(lmax > 0.0)) throw PreconditionError(std::string(label) + " is not positive definite");
  const double floor = 1e-12 * lmax;
  if (lam(0) <= floor) {
    if (!allow_clamp) {
      std::ostringstream os;
      os << label << " is numerically singular (min eigenvalue " << lam(0) << ", max " << lmax
         << "); truncate to a minimal realization first";
      throw PreconditionError(os.str());
    }
    if (warnings != nullptr) {
      std::ostringstream os;
      os << label << ": eigenvalues clamped at " << floor << " (min was " << lam(0) << ")";
      warnings->push_back(os.str());
    }
  }
  const Vector lc = lam.cwiseMax(floor);
  const Matrix Xc = symmetrized(es.eigenvectors() * lc.asDiagonal() * es.eigenvectors().transpose());
  Eigen::LLT<Matrix> llt(Xc);
  if (llt.info() != Eigen::Success)
    throw NumericalError(std::string(label) + ": Cholesky failed after clamping");
  return Matrix(llt.matrixL()).transpose();
}

}  // namespace detail

/// Square-root balancing of an input/output Gramian pair:
/// X_i = R_i^T R_i, X_o = R_o^T R_o, svd R_o R_i^T = U Gamma V^T,
/// T = Gamma^(-1/2) U^T R_o, T^-1 = R_i^T V Gamma^(-1/2); then
/// T X_i T^T = T^-T X_o T^-1 = Gamma.
///
/// Each column of U is sign-fixed so its largest-magnitude entry is positive
/// (V adjusted accordingly), making T deterministic across platforms.
inline BalancingResult balancing_transform(const Matrix& X_i, const Matrix& X_o,
                                           bool allow_clamp = false) {
  if (X_i.rows() != X_o.rows() || X_i.cols() != X_o.cols())
    throw DimensionError("balancing_transform: Gramians must have equal size");
  BalancingResult out;
  const Matrix Ri = detail::spd_upper_factor(X_i, "input Gramian", allow_clamp, &out.warnings);
  const Matrix Ro = detail::spd_upper_factor(X_o, "output Gramian", allow_clamp, &out.warnings);

  Eigen::BDCSVD<Matrix> svd(Ro * Ri.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix U = svd.matrixU();
  Matrix V = svd.matrixV();
  for (Index k = 0; k < U.cols(); ++k) {
    Index imax = 0;
    U.col(k).cwiseAbs().maxCoeff(&imax);
    if (U(imax, k) < 0.0) {
      U.col(k) = -U.col(k);
      V.col(k) = -V.col(k);
    }
  }
  out.gamma = svd.singularValues();
  const Index n = out.gamma.size();
  if (!(out.gamma(n - 1) > 1e-12 * out.gamma(0))) {
    std::ostringstream os;
    os << "balancing_transform: gamma_n = " << out.gamma(n - 1) << " below 1e-12*gamma_1 = "
       << 1e-12 * out.gamma(0) << " (near-nonminimal direction); reduce to a minimal realization first";
    throw PreconditionError(os.str());
  }
  const Vector gis = out.gamma.array().rsqrt();
  out.T = gis.asDiagonal() * U.transpose() * Ro;
  out.T_inv = Ri.transpose() * V * gis.asDiagonal();

  const double id_err = (out.T * out.T_inv - Matrix::Identity(n, n)).norm();
  if (id_err > 1e-9 * std::sqrt(static_cast<double>(n))) {
    std::ostringstream os;
    os << "balancing_transform: T*T_inv deviates from identity by " << id_err;
    throw NumericalError(os.str());
  }
  return out;
}

/// System in balanced coordinates together with the transformation.
struct BalancedRealization {
  StateSpace sys;
  Matrix T, T_inv;
  Vector gamma;
  std::vector<std::string> warnings;
};

inline BalancedRealization balance_with(const StateSpace& sys, const Matrix& X_i,
                                        const Matrix& X_o, bool allow_clamp = false) {
  if (X_i.rows() != sys.order())
    throw DimensionError("balance_with: Gramian size must match system order");
  BalancingResult b = balancing_transform(X_i, X_o, allow_clamp);
  BalancedRealization out;
  out.sys = StateSpace(b.T * sys.A * b.T_inv, b.T * sys.B, sys.C * b.T_inv, sys.D);
  out.T = std::move(b.T);
  out.T_inv = std::move(b.T_inv);
  out.gamma = std::move(b.gamma);
  out.warnings = std::move(b.warnings);
  return out;
}

enum class ReductionMethod { LyapBT, PRBT, MGBT, ISBT, PIBT };

inline const char* reduction_method_name(ReductionMethod m) {
  switch (m) {
    case ReductionMethod::LyapBT: return "lyapbt";
    case ReductionMethod::PRBT: return "prbt";
    case ReductionMethod::MGBT: return "mgbt";
    case ReductionMethod::ISBT: return "isbt";
    case ReductionMethod::PIBT: return "pibt";
  }
  return "?";
}

struct ReductionResult {
  StateSpace reduced;
  Index kept_order = 0;
  Vector gamma;            // full balanced spectrum
  Vector discarded_gamma;  // tail beyond kept_order
  ReductionMethod method = ReductionMethod::LyapBT;
  std::vector<std::string> warnings;
  std::optional<PassivityCertificate> certificate;  // for passivity-preserving methods
};

/// Keep the leading r balanced states: (A11, B1, C1, D).
inline ReductionResult truncate(const BalancedRealization& bal, Index r,
                                ReductionMethod method = ReductionMethod::LyapBT) {
  const Index n = bal.sys.order();
  if (r < 1 || r > n) throw PreconditionError("truncate: order r out of range");
  ReductionResult out;
  out.warnings = bal.warnings;
  if (r < n && bal.gamma(r - 1) - bal.gamma(r) <= 1e-9 * bal.gamma(0)) {
    std::ostringstream os;
    os << "truncate: gamma_" << r << " and gamma_" << r + 1
       << " are nearly tied (" << bal.gamma(r - 1) << " vs " << bal.gamma(r)
       << "); stability of the truncation is not guaranteed";
    out.warnings.push_back(os.str());
  }
  out.reduced = StateSpace(bal.sys.A.topLeftCorner(r, r), bal.sys.B.topRows(r),
                           bal.sys.C.leftCols(r), bal.sys.D);
  out.kept_order = r;
  out.gamma = bal.gamma;
  out.discarded_gamma = bal.gamma.tail(n - r);
  out.method = method;
  return out;
}

}  // namespace structmor
