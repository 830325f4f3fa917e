#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "structmor/errors.hpp"
#include "structmor/log.hpp"
#include "structmor/types.hpp"

namespace structmor {

/// Affine matrix inequality  G(x) = G0 + sum_i x_i * basis[i]  >= 0
/// with all matrices symmetric of equal size.
struct LmiProblem {
  Matrix G0;
  std::vector<Matrix> basis;
  Vector cost;  // minimize cost.dot(x)
};

struct IpmOptions {
  int max_iterations = 120;
  double tolerance = 1e-10;      // target for gap and residual measures (relative)
  double step_fraction = 0.98;   // fraction of the max step to the PSD boundary
};

enum class IpmStatus { Converged, Stalled, IterationLimit };

struct IpmResult {
  Vector x;              // minimizer estimate
  Matrix X;              // dual certificate (Lagrange multiplier of the LMI), PSD
  Matrix Z;              // slack G(x) maintained positive definite internally
  double mu = 0.0;
  double gap = 0.0;               // |c'x + <G0,X>| scaled
  double primal_residual = 0.0;   // ||c_i - <G_i,X>|| scaled
  double dual_residual = 0.0;     // ||G(x) - Z|| scaled
  int iterations = 0;
  IpmStatus status = IpmStatus::IterationLimit;
};

inline Matrix lmi_eval(const LmiProblem& p, const Vector& x) {
  Matrix G = p.G0;
  for (size_t i = 0; i < p.basis.size(); ++i) G += x(static_cast<Index>(i)) * p.basis[i];
  return symmetrized(G);
}

namespace detail {

/// Largest alpha with S + alpha*dS >= 0, for S > 0.
inline double max_psd_step(const Matrix& S, const Matrix& dS) {
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success) return 0.0;
  const Matrix L = llt.matrixL();
  Matrix W = L.triangularView<Eigen::Lower>().solve(dS);
  W = L.triangularView<Eigen::Lower>().solve(W.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(W), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (lmin >= -1e-14) return 1e16;
  return -1.0 / lmin;
}

inline double frob_inner(const Matrix& a, const Matrix& b) {
  return (a.array() * b.array()).sum();
}

}  // namespace detail

/// Minimize cost'x over the LMI cone by an infeasible-start Mehrotra
/// predictor-corrector interior-point method (HKM scaling).
///
/// The Newton step solves the Schur-complement system
///   M dx = sigma*mu*<G_i,Z^-1> - c_i - <G_i, Z^-1 Rd X> - corrector_i,
///   M_ij = <G_i, Z^-1 G_j X>,
/// with dZ = sum dx_j G_j + Rd and dX recovered from the linearized
/// complementarity condition, symmetrized. M is symmetric positive definite
/// for a linearly independent basis.
///
/// Weakly feasible problems (empty interior) make the iteration stall at
/// moderate accuracy; the caller is expected to polish (see passivity.hpp).
inline IpmResult minimize_over_lmi(const LmiProblem& prob, const IpmOptions& opt = {},
                                   const Vector* warm_start = nullptr) {
  const Index N = prob.G0.rows();
  const Index m = static_cast<Index>(prob.basis.size());
  if (prob.G0.rows() != prob.G0.cols()) throw DimensionError("LMI constant term must be square");
  if (prob.cost.size() != m) throw DimensionError("LMI cost size must match basis count");
  for (const auto& g : prob.basis)
    if (g.rows() != N || g.cols() != N) throw DimensionError("LMI basis size mismatch");

  // Normalize basis magnitudes; x is rescaled back on exit.
  std::vector<Matrix> Gs(prob.basis.size());
  Vector scale(m), c(m);
  for (Index i = 0; i < m; ++i) {
    const Matrix gi = symmetrized(prob.basis[static_cast<size_t>(i)]);
    scale(i) = std::max(gi.norm(), 1e-12);
    Gs[static_cast<size_t>(i)] = gi / scale(i);
    c(i) = prob.cost(i) / scale(i);
  }
  const Matrix G0 = symmetrized(prob.G0);
  const double g0_scale = 1.0 + G0.norm();

  IpmResult res;
  Vector x = Vector::Zero(m);
  if (warm_start != nullptr) {
    if (warm_start->size() != m) throw DimensionError("warm start size mismatch");
    x = warm_start->cwiseProduct(scale);
  }

  auto eval_scaled = [&](const Vector& xs) {
    Matrix G = G0;
    for (Index i = 0; i < m; ++i) G += xs(i) * Gs[static_cast<size_t>(i)];
    return symmetrized(G);
  };

  Matrix G = eval_scaled(x);
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    const double shift = std::max(0.0, -1.25 * lmin) + 1e-2 * g0_scale;
    res.Z = G + shift * Matrix::Identity(N, N);
  }
  res.X = std::max(1.0, c.lpNorm<Eigen::Infinity>()) * Matrix::Identity(N, N);

  Matrix& Z = res.Z;
  Matrix& X = res.X;
  const double tau = opt.step_fraction;
  int slow_steps = 0;
  double mu_prev = std::numeric_limits<double>::infinity();

  std::vector<Matrix> K(Gs.size());
  Matrix M(m, m);
  Vector zi_vec(m), rd_vec(m), rhs(m);

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    G = eval_scaled(x);
    const Matrix Rd = G - Z;
    Vector rp(m);
    for (Index i = 0; i < m; ++i) rp(i) = c(i) - detail::frob_inner(Gs[static_cast<size_t>(i)], X);
    const double mu = detail::frob_inner(X, Z) / static_cast<double>(N);

    const double cx = c.dot(x);
    const double gX = detail::frob_inner(G0, X);
    res.mu = mu;
    res.gap = std::abs(cx + gX) / (1.0 + std::abs(cx) + std::abs(gX));
    res.dual_residual = Rd.norm() / g0_scale;
    res.primal_residual = rp.norm() / (1.0 + c.norm());
    res.iterations = iter;

    const double crit = std::max({res.gap, res.dual_residual, res.primal_residual,
                                  mu / (1.0 + std::abs(cx))});
    if (crit < opt.tolerance) {
      res.status = IpmStatus::Converged;
      break;
    }
    if (slow_steps >= 3 || (iter > 8 && mu > 0.97 * mu_prev && res.dual_residual < 1e-12)) {
      res.status = IpmStatus::Stalled;
      break;
    }
    mu_prev = mu;

    Eigen::LLT<Matrix> zllt(Z);
    if (zllt.info() != Eigen::Success) {
      // fall back: nudge Z into the cone
      Eigen::SelfAdjointEigenSolver<Matrix> es(Z, Eigen::EigenvaluesOnly);
      Z += (std::abs(es.eigenvalues()(0)) + 1e-12 * g0_scale) * Matrix::Identity(N, N);
      zllt.compute(Z);
      if (zllt.info() != Eigen::Success) {
        res.status = IpmStatus::Stalled;
        break;
      }
    }
    const Matrix Zi = zllt.solve(Matrix::Identity(N, N));

    for (size_t j = 0; j < Gs.size(); ++j) K[j] = Zi * (Gs[j] * X);
    for (Index i = 0; i < m; ++i) {
      zi_vec(i) = detail::frob_inner(Gs[static_cast<size_t>(i)], Zi);
      for (Index j = i; j < m; ++j) {
        const double t = detail::frob_inner(Gs[static_cast<size_t>(i)], K[static_cast<size_t>(j)]);
        M(i, j) = t;
        M(j, i) = t;
      }
    }
    const Matrix Prd = Zi * Rd * X;
    for (Index i = 0; i < m; ++i) rd_vec(i) = detail::frob_inner(Gs[static_cast<size_t>(i)], Prd);

    Eigen::LDLT<Matrix> mldlt(M);
    if (mldlt.info() != Eigen::Success || !mldlt.isPositive()) {
      M += 1e-12 * M.trace() / static_cast<double>(m) * Matrix::Identity(m, m) +
           1e-300 * Matrix::Identity(m, m);
      mldlt.compute(M);
    }

    auto recover_directions = [&](const Vector& dx, double sigma_mu, const Matrix* second_order,
                                  Matrix& dZ, Matrix& dX) {
      dZ = Rd;
      for (Index j = 0; j < m; ++j) dZ += dx(j) * Gs[static_cast<size_t>(j)];
      dZ = symmetrized(dZ);
      Matrix W = Zi * dZ * X;
      dX = -X - symmetrized(W);
      if (sigma_mu > 0.0) dX += sigma_mu * Zi;
      if (second_order != nullptr) dX -= symmetrized(*second_order);
      dX = symmetrized(dX);
    };

    // predictor
    rhs = -c - rd_vec;
    Vector dx_aff = mldlt.solve(rhs);
    Matrix dZ_aff, dX_aff;
    recover_directions(dx_aff, 0.0, nullptr, dZ_aff, dX_aff);
    double ap = std::min(1.0, tau * detail::max_psd_step(X, dX_aff));
    double ad = std::min(1.0, tau * detail::max_psd_step(Z, dZ_aff));
    const double mu_aff =
        detail::frob_inner(X + ap * dX_aff, Z + ad * dZ_aff) / static_cast<double>(N);
    double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
    sigma = std::clamp(sigma, 1e-8, 1.0);

    // corrector
    const Matrix Pcc = Zi * dZ_aff * dX_aff;
    for (Index i = 0; i < m; ++i)
      rhs(i) = sigma * mu * zi_vec(i) - c(i) - rd_vec(i) -
               detail::frob_inner(Gs[static_cast<size_t>(i)], Pcc);
    Vector dx = mldlt.solve(rhs);
    Matrix dZ, dX;
    recover_directions(dx, sigma * mu, &Pcc, dZ, dX);

    ap = std::min(1.0, tau * detail::max_psd_step(X, dX));
    ad = std::min(1.0, tau * detail::max_psd_step(Z, dZ));
    x += ad * dx;
    Z = symmetrized(Z + ad * dZ);
    X = symmetrized(X + ap * dX);
    slow_steps = std::min(ap, ad) < 1e-4 ? slow_steps + 1 : 0;

    if (log_level() >= LogLevel::Debug) {
      std::ostringstream os;
      os << "ipm iter " << iter << " mu=" << mu << " gap=" << res.gap << " rp=" << res.primal_residual
         << " rd=" << res.dual_residual << " ap=" << ap << " ad=" << ad << " sigma=" << sigma;
      log_debug(os.str());
    }
  }

  res.x = x.cwiseQuotient(scale);
  return res;
}

}  // namespace structmor
