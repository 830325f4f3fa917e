#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "structmor/errors.hpp"
#include "structmor/lyapunov.hpp"
#include "structmor/state_space.hpp"
#include "structmor/types.hpp"

namespace structmor {

/// E(s) = G(s) - Ghat(s) as a state-space system: block-diagonal states with
/// the second output map negated.
inline StateSpace error_system(const StateSpace& g, const StateSpace& ghat) {
  g.check_dimensions();
  ghat.check_dimensions();
  if (g.inputs() != ghat.inputs() || g.outputs() != ghat.outputs())
    throw DimensionError("error_system: input/output dimensions must match");
  const Index n1 = g.order(), n2 = ghat.order();
  Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = g.A;
  A.bottomRightCorner(n2, n2) = ghat.A;
  Matrix B(n1 + n2, g.inputs());
  B << g.B, ghat.B;
  Matrix C(g.outputs(), n1 + n2);
  C << g.C, -ghat.C;
  return StateSpace(std::move(A), std::move(B), std::move(C), g.D - ghat.D);
}

/// H2 norm: sqrt(trace(C P C^T)) with P the controllability Gramian.
/// Infinity when the system is unstable or has nonzero feedthrough (the
/// defining integral diverges in both cases).
inline double h2_norm(const StateSpace& sys) {
  sys.check_dimensions();
  if (!is_hurwitz(sys.A)) return std::numeric_limits<double>::infinity();
  if (!sys.D.isZero(0.0)) return std::numeric_limits<double>::infinity();
  const Matrix P = solve_lyapunov(sys.A, sys.B * sys.B.transpose());
  return std::sqrt(std::max(0.0, (sys.C * P * sys.C.transpose()).trace()));
}

struct LinfOptions {
  double f_min = 1.0;       // Hz
  double f_max = 1e5;       // Hz
  int points = 2000;        // log-spaced grid
  double refine_tol = 1e-4; // relative movement before refinement stops
};

struct GridStats {
  int evaluations = 0;
  int refinement_depth = 0;
};

struct LinfReport {
  double value = 0.0;
  double omega = 0.0;  // rad/s of the supremum; +inf if attained as omega -> inf
  GridStats stats;
};

namespace detail {

class SigmaEvaluator {
 public:
  explicit SigmaEvaluator(const StateSpace& sys)
      : C_(sys.C.cast<Complex>()), B_(sys.B.cast<Complex>()), D_(sys.D.cast<Complex>()),
        A_(sys.A.cast<Complex>()), n_(sys.order()) {}

  double operator()(double omega) {
    ++evals_;
    ComplexMatrix M = ComplexMatrix::Identity(n_, n_) * Complex(0.0, omega) - A_;
    ComplexMatrix G = C_ * M.partialPivLu().solve(B_) + D_;
    if (!G.allFinite()) return std::numeric_limits<double>::infinity();
    Eigen::JacobiSVD<ComplexMatrix> svd(G);
    return svd.singularValues()(0);
  }

  int evaluations() const { return evals_; }

 private:
  ComplexMatrix C_, B_, D_, A_;
  Index n_;
  int evals_ = 0;
};

/// Golden-section maximization of f over [a, b].
template <typename F>
std::pair<double, double> golden_max(F&& f, double a, double b, double rel_tol, int max_iter,
                                     int* depth) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  int it = 0;
  for (; it < max_iter; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
    const double fm = std::max(f1, f2);
    if ((b - a) <= rel_tol * std::max(1e-300, std::abs(a) + std::abs(b)) ||
        std::abs(f1 - f2) <= 1e-3 * rel_tol * std::max(1e-300, fm))
      break;
  }
  if (depth != nullptr) *depth = std::max(*depth, it);
  return f1 > f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace detail

/// Largest singular value of G(j omega) over frequency, by an adaptive log
/// grid with golden-section refinement around every local maximum; omega = 0
/// and the omega -> inf limit sigma_max(D) are always candidates. Infinite
/// when A has eigenvalues within 1e-9*||A|| of the imaginary axis.
inline LinfReport linf_norm(const StateSpace& sys, const LinfOptions& opts = {}) {
  sys.check_dimensions();
  LinfReport rep;

  const ComplexVector eigs = eigenvalues_of(sys.A);
  const double axis_tol = 1e-9 * std::max(1.0, sys.A.norm());
  for (Index i = 0; i < eigs.size(); ++i) {
    if (std::abs(eigs[i].real()) <= axis_tol) {
      rep.value = std::numeric_limits<double>::infinity();
      rep.omega = std::abs(eigs[i].imag());
      return rep;
    }
  }

  detail::SigmaEvaluator sigma(sys);
  const int npts = std::max(2, opts.points);
  std::vector<double> w(static_cast<size_t>(npts) + 1);
  std::vector<double> s(w.size());
  w[0] = 0.0;
  const double lw0 = std::log(2.0 * M_PI * opts.f_min);
  const double lw1 = std::log(2.0 * M_PI * opts.f_max);
  for (int i = 0; i < npts; ++i)
    w[static_cast<size_t>(i) + 1] = std::exp(lw0 + (lw1 - lw0) * i / double(npts - 1));
  for (size_t i = 0; i < w.size(); ++i) s[i] = sigma(w[i]);

  double best_val = -1.0, best_w = 0.0;
  int depth = 0;
  for (size_t i = 0; i < w.size(); ++i) {
    const bool left_ok = i == 0 || s[i] >= s[i - 1];
    const bool right_ok = i + 1 == w.size() || s[i] >= s[i + 1];
    if (!(left_ok && right_ok)) continue;
    const double a = i == 0 ? w[0] : w[i - 1];
    const double b = i + 1 == w.size() ? w[i] * (w[i] > 0 ? 4.0 : 1.0) + 1.0 : w[i + 1];
    auto [wm, sm] = detail::golden_max(sigma, a, b, opts.refine_tol * 1e-3, 200, &depth);
    double val = sm, wat = wm;
    if (s[i] > val) {
      val = s[i];
      wat = w[i];
    }
    if (val > best_val) {
      best_val = val;
      best_w = wat;
    }
  }

  // omega -> inf limit
  const double d_sigma = sys.D.isZero(0.0) ? 0.0 : Eigen::JacobiSVD<Matrix>(sys.D).singularValues()(0);
  if (d_sigma > best_val) {
    best_val = d_sigma;
    best_w = std::numeric_limits<double>::infinity();
  }

  rep.value = best_val;
  rep.omega = best_w;
  rep.stats.evaluations = sigma.evaluations();
  rep.stats.refinement_depth = depth;
  return rep;
}

/// Norms of the mismatch between two models.
struct NormReport {
  double h2 = 0.0;
  double linf = 0.0;
  double linf_omega = 0.0;
  GridStats grid;
};

inline NormReport error_norms(const StateSpace& g, const StateSpace& ghat,
                              const LinfOptions& opts = {}) {
  const StateSpace err = error_system(g, ghat);
  NormReport rep;
  rep.h2 = h2_norm(err);
  const LinfReport li = linf_norm(err, opts);
  rep.linf = li.value;
  rep.linf_omega = li.omega;
  rep.grid = li.stats;
  return rep;
}

}  // namespace structmor
