#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "structmor/balancing.hpp"
#include "structmor/certificate.hpp"
#include "structmor/errors.hpp"
#include "structmor/lyapunov.hpp"
#include "structmor/riccati.hpp"
#include "structmor/sdp.hpp"
#include "structmor/state_space.hpp"
#include "structmor/types.hpp"

namespace structmor {

/// Assembled positive-real LMI block
///   [[A^T Xi + Xi A,  Xi B - C^T],
///    [B^T Xi - C,    -(D + D^T)]];
/// Xi is a valid storage matrix iff the block is negative semidefinite.
struct LmiBlock {
  Matrix M;
  Index n = 0, p = 0;
};

inline LmiBlock storage_lmi_block(const StateSpace& sys, const Matrix& Xi) {
  if (!sys.square_io()) throw DimensionError("storage LMI requires a square system");
  if (Xi.rows() != sys.order() || Xi.cols() != sys.order())
    throw DimensionError("storage matrix must be n x n");
  const Index n = sys.order();
  const Index p = sys.inputs();
  LmiBlock blk;
  blk.n = n;
  blk.p = p;
  blk.M.resize(n + p, n + p);
  blk.M.topLeftCorner(n, n) = sys.A.transpose() * Xi + Xi * sys.A;
  blk.M.topRightCorner(n, p) = Xi * sys.B - sys.C.transpose();
  blk.M.bottomLeftCorner(p, n) = blk.M.topRightCorner(n, p).transpose();
  blk.M.bottomRightCorner(p, p) = -(sys.D + sys.D.transpose());
  blk.M = symmetrized(blk.M);
  return blk;
}

/// Block plus its largest eigenvalue (<= 0 means Xi certifies passivity).
inline std::pair<LmiBlock, double> lmi_residual(const StateSpace& sys, const Matrix& Xi) {
  LmiBlock blk = storage_lmi_block(sys, Xi);
  Eigen::SelfAdjointEigenSolver<Matrix> es(blk.M, Eigen::EigenvaluesOnly);
  return {std::move(blk), es.eigenvalues().maxCoeff()};
}

inline double feasibility_tolerance(const Matrix& Xi) { return 1e-7 * (1.0 + Xi.norm()); }

enum class StorageEngine { Auto, InteriorPoint, Riccati };

struct StorageOptions {
  bool minimal = true;              // false: any feasible storage matrix is acceptable
  StorageEngine engine = StorageEngine::Auto;
  double riccati_eps = 1e-8;        // regularization for singular D + D^T
  bool prebalance = true;           // solve in Lyapunov-balanced coordinates
  IpmOptions ipm;
};

namespace detail {

inline Index sym_dim(Index n) { return n * (n + 1) / 2; }

inline Matrix unpack_sym(const Vector& v, Index n) {
  Matrix X(n, n);
  Index k = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) {
      X(i, j) = v(k);
      X(j, i) = v(k);
      ++k;
    }
  return X;
}

inline Vector pack_sym(const Matrix& X) {
  const Index n = X.rows();
  Vector v(sym_dim(n));
  Index k = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) v(k++) = X(i, j);
  return v;
}

/// Lyapunov-balancing similarity for numerically friendly LMI coordinates.
/// Identity when the system is unstable/near-nonminimal; exactness is not at
/// stake, only conditioning (minimal solutions map by congruence).
inline std::pair<Matrix, Matrix> prebalance_pair(const StateSpace& sys) {
  const Index n = sys.order();
  const Matrix id = Matrix::Identity(n, n);
  try {
    if (!is_hurwitz(sys.A)) return {id, id};
    const Matrix P = solve_lyapunov(sys.A, sys.B * sys.B.transpose());
    const Matrix Q = solve_lyapunov(sys.A.transpose(), sys.C.transpose() * sys.C);
    BalancingResult b = balancing_transform(P, Q, /*allow_clamp=*/false);
    return {b.T, b.T_inv};
  } catch (const std::exception&) {
    return {id, id};
  }
}

/// Storage LMI after structural (facial) reduction.
///
/// Null directions of D + D^T force (Xi B - C^T) V0 = 0 exactly (a PSD matrix
/// with a zero diagonal block has zero coupling); those linear equalities are
/// eliminated and the remaining LMI block shrinks to n + rank(D + D^T):
///   G(eta) = [[-(A^T Xi + Xi A), (C^T - Xi B) V+], [., V+^T (D+D^T) V+]] >= 0
/// with Xi = unpack(xi_p + kernel * eta).
struct StorageSdp {
  LmiProblem prob;        // in the reduced variable eta
  Vector xi_p;            // particular solution of the forced equalities
  Matrix kernel;          // m x q, xi = xi_p + kernel * eta
  double cost_offset = 0.0;
  double equality_residual = 0.0;  // relative inconsistency of forced equalities
  Index n = 0, p = 0, p_plus = 0;
  Matrix Vplus;
};

inline StorageSdp build_storage_sdp(const StateSpace& sys) {
  const Index n = sys.order();
  const Index p = sys.inputs();
  const Index m = sym_dim(n);
  StorageSdp out;
  out.n = n;
  out.p = p;

  const Matrix R = symmetrized(sys.D + sys.D.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> res_(R);
  const Vector& rlam = res_.eigenvalues();
  const double rmax = rlam.size() > 0 ? std::max(std::abs(rlam(0)), std::abs(rlam(rlam.size() - 1))) : 0.0;
  const double tau_zero = 1e-12 * std::max(1.0, rmax);
  if (rlam.size() > 0 && rlam(0) < -1e-9 * std::max(1.0, rmax)) {
    // D + D^T indefinite: LMI infeasible outright
    out.equality_residual = std::numeric_limits<double>::infinity();
    return out;
  }

  std::vector<Index> plus_idx, null_idx;
  for (Index i = 0; i < rlam.size(); ++i)
    (rlam(i) > tau_zero ? plus_idx : null_idx).push_back(i);
  out.p_plus = static_cast<Index>(plus_idx.size());
  const Index p0 = static_cast<Index>(null_idx.size());
  out.Vplus.resize(p, out.p_plus);
  for (Index k = 0; k < out.p_plus; ++k) out.Vplus.col(k) = res_.eigenvectors().col(plus_idx[static_cast<size_t>(k)]);
  Matrix Vnull(p, p0);
  for (Index k = 0; k < p0; ++k) Vnull.col(k) = res_.eigenvectors().col(null_idx[static_cast<size_t>(k)]);

  // Forced equalities: Xi (B v) = C^T v for every null direction v.
  if (p0 > 0) {
    Matrix E = Matrix::Zero(n * p0, m);
    Vector f(n * p0);
    const Matrix BV = sys.B * Vnull;
    const Matrix CV = sys.C.transpose() * Vnull;
    for (Index c = 0; c < p0; ++c) {
      for (Index i = 0; i < n; ++i) {
        const Index row = c * n + i;
        f(row) = CV(i, c);
        Index k = 0;
        for (Index a = 0; a < n; ++a)
          for (Index b = a; b < n; ++b) {
            double coef = 0.0;
            if (a == b) {
              if (i == a) coef = BV(a, c);
            } else {
              if (i == a) coef += BV(b, c);
              if (i == b) coef += BV(a, c);
            }
            E(row, k) = coef;
            ++k;
          }
      }
    }
    Eigen::BDCSVD<Matrix> esvd(E, Eigen::ComputeThinU | Eigen::ComputeFullV);
    out.xi_p = esvd.solve(f);
    out.equality_residual = (E * out.xi_p - f).norm() / (1.0 + f.norm());
    const Vector& sv = esvd.singularValues();
    const double stol = std::max(E.rows(), E.cols()) * std::numeric_limits<double>::epsilon() *
                        (sv.size() > 0 ? sv(0) : 0.0);
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
      if (sv(i) > stol) ++rank;
    out.kernel = esvd.matrixV().rightCols(m - rank);
  } else {
    out.xi_p = Vector::Zero(m);
    out.kernel = Matrix::Identity(m, m);
    out.equality_residual = 0.0;
  }

  // Reduced block builder; linear in Xi except the constant C^T V+ and R++ parts.
  const Index nr = n + out.p_plus;
  auto block_of = [&](const Matrix& Xi, bool constant_part) {
    Matrix G = Matrix::Zero(nr, nr);
    G.topLeftCorner(n, n) = -(sys.A.transpose() * Xi + Xi * sys.A);
    Matrix tr = -Xi * sys.B * out.Vplus;
    if (constant_part) tr += sys.C.transpose() * out.Vplus;
    G.topRightCorner(n, out.p_plus) = tr;
    G.bottomLeftCorner(out.p_plus, n) = tr.transpose();
    if (constant_part) G.bottomRightCorner(out.p_plus, out.p_plus) = out.Vplus.transpose() * R * out.Vplus;
    return symmetrized(G);
  };

  out.prob.G0 = block_of(unpack_sym(out.xi_p, n), true);
  const Index q = out.kernel.cols();
  out.prob.basis.reserve(static_cast<size_t>(q));
  out.prob.cost.resize(q);
  for (Index k = 0; k < q; ++k) {
    const Matrix Nk = unpack_sym(out.kernel.col(k), n);
    out.prob.basis.push_back(block_of(Nk, false));
    out.prob.cost(k) = Nk.trace();
  }
  out.cost_offset = unpack_sym(out.xi_p, n).trace();
  return out;
}

/// Phase-I: min t + nu*trace(Xi) s.t. G(eta) + t I >= 0. Always strictly
/// feasible, so the IPM is well behaved even for non-passive systems.
struct PhaseOneResult {
  Vector eta;
  double t_star = std::numeric_limits<double>::infinity();
};

inline PhaseOneResult storage_phase_one(const StorageSdp& sdp, const IpmOptions& opts) {
  const Index q = sdp.prob.basis.size() > 0 ? static_cast<Index>(sdp.prob.basis.size()) : 0;
  const Index nr = sdp.prob.G0.rows();
  LmiProblem p1;
  p1.G0 = sdp.prob.G0;
  p1.basis = sdp.prob.basis;
  p1.basis.push_back(Matrix::Identity(nr, nr));
  const double cost_scale = sdp.prob.cost.size() > 0 ? sdp.prob.cost.cwiseAbs().sum() : 0.0;
  const double nu = 1e-9 * (1.0 + sdp.prob.G0.norm()) / (1.0 + cost_scale);
  p1.cost.resize(q + 1);
  if (q > 0) p1.cost.head(q) = nu * sdp.prob.cost;
  p1.cost(q) = 1.0;

  Vector warm = Vector::Zero(q + 1);
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sdp.prob.G0, Eigen::EigenvaluesOnly);
    warm(q) = std::max(0.0, -es.eigenvalues()(0)) + 0.1 * (1.0 + sdp.prob.G0.norm());
  }
  IpmOptions o = opts;
  IpmResult r = minimize_over_lmi(p1, o, &warm);
  PhaseOneResult out;
  out.eta = q > 0 ? Vector(r.x.head(q)) : Vector(0);
  out.t_star = r.x(q);
  return out;
}

/// Null-space polish after trace minimization. Dominant eigendirections of the
/// dual multiplier X are active constraints, so G(eta)v = 0 must hold there;
/// imposing those equalities pins the solution exactly on unique-optimum
/// instances where the interior-point iteration can only stall nearby.
inline Vector polish_trace_min(const StorageSdp& sdp, const Vector& eta_hat, const Matrix& Xdual) {
  const Index q = static_cast<Index>(sdp.prob.basis.size());
  const Index nr = sdp.prob.G0.rows();
  if (q == 0) return eta_hat;

  auto violation = [&](const Vector& eta) {
    const Matrix G = lmi_eval(sdp.prob, eta);
    Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
    return std::max(0.0, -es.eigenvalues()(0));
  };
  auto trace_of = [&](const Vector& eta) { return sdp.prob.cost.dot(eta); };

  const double g0n = 1.0 + sdp.prob.G0.norm();
  const double tau_strict = 1e-11 * g0n;
  const double tau_loose = 1e-7 * g0n;

  struct Candidate {
    Vector eta;
    double viol;
    double trace;
  };
  std::vector<Candidate> cands;
  cands.push_back({eta_hat, violation(eta_hat), trace_of(eta_hat)});

  Eigen::SelfAdjointEigenSolver<Matrix> xe(symmetrized(Xdual));
  const Vector& xl = xe.eigenvalues();
  const double xmax = xl.size() > 0 ? xl(xl.size() - 1) : 0.0;
  if (xmax <= 0.0) return eta_hat;

  for (double rel : {1e-3, 1e-6, 1e-9}) {
    std::vector<Index> act;
    for (Index i = 0; i < xl.size(); ++i)
      if (xl(i) >= rel * xmax) act.push_back(i);
    if (act.empty() || static_cast<Index>(act.size()) == nr) continue;
    const Index r = static_cast<Index>(act.size());
    Matrix Aeq(nr * r, q);
    Vector beq(nr * r);
    for (Index k = 0; k < r; ++k) {
      const Vector v = xe.eigenvectors().col(act[static_cast<size_t>(k)]);
      for (Index j = 0; j < q; ++j) Aeq.block(k * nr, j, nr, 1) = sdp.prob.basis[static_cast<size_t>(j)] * v;
      beq.segment(k * nr, nr) = -(sdp.prob.G0 * v);
    }
    // minimum-norm correction onto the active equalities
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Aeq);
    const Vector delta = cod.solve(beq - Aeq * eta_hat);
    Vector eta_c = eta_hat + delta;
    cands.push_back({eta_c, violation(eta_c), trace_of(eta_c)});
  }

  auto pick = [&](double tol) -> const Candidate* {
    const Candidate* best = nullptr;
    for (const auto& c : cands)
      if (c.viol <= tol && (best == nullptr || c.trace < best->trace)) best = &c;
    return best;
  };
  if (const Candidate* c = pick(tau_strict)) return c->eta;
  if (const Candidate* c = pick(tau_loose)) return c->eta;
  return eta_hat;
}

struct StorageSolve {
  Matrix Xi;
  double max_eig = std::numeric_limits<double>::infinity();  // in original coordinates
  bool feasible = false;
  CertificateMethod method = CertificateMethod::Sdp;
};

/// Interior-point route: facial reduction, phase-I feasibility, then (when
/// requested) trace minimization with the null-space polish, all in
/// prebalanced coordinates.
inline StorageSolve storage_solve_ipm(const StateSpace& sys, const StorageOptions& opts,
                                      bool want_minimal) {
  const Index n = sys.order();
  StorageSolve out;
  out.method = CertificateMethod::Sdp;

  Matrix T = Matrix::Identity(n, n);
  Matrix Tinv = T;
  if (opts.prebalance) std::tie(T, Tinv) = prebalance_pair(sys);
  const StateSpace work(T * sys.A * Tinv, T * sys.B, sys.C * Tinv, sys.D);

  const StorageSdp sdp = build_storage_sdp(work);
  auto to_original = [&](const Matrix& Xi_work) { return symmetrized(T.transpose() * Xi_work * T); };

  if (!std::isfinite(sdp.equality_residual)) {
    // D + D^T has a negative eigenvalue; no storage matrix exists
    out.Xi = to_original(Matrix::Identity(n, n));
    out.max_eig = lmi_residual(sys, out.Xi).second;
    out.feasible = false;
    return out;
  }
  if (sdp.equality_residual > 1e-8) {
    out.Xi = to_original(unpack_sym(sdp.xi_p, n));
    out.max_eig = lmi_residual(sys, out.Xi).second;
    out.feasible = false;
    return out;
  }

  const Index q = static_cast<Index>(sdp.prob.basis.size());
  Vector eta = Vector::Zero(q);
  if (q == 0) {
    // equalities pin Xi completely
    out.Xi = to_original(unpack_sym(sdp.xi_p, n));
    out.max_eig = lmi_residual(sys, out.Xi).second;
    out.feasible = out.max_eig <= feasibility_tolerance(out.Xi);
    return out;
  }

  PhaseOneResult p1 = storage_phase_one(sdp, opts.ipm);
  eta = p1.eta;
  {
    const Matrix Xi0 = to_original(unpack_sym(sdp.xi_p + sdp.kernel * eta, n));
    const double tol0 = feasibility_tolerance(Xi0);
    if (p1.t_star > tol0 * 10.0 && lmi_residual(sys, Xi0).second > tol0) {
      out.Xi = Xi0;
      out.max_eig = lmi_residual(sys, Xi0).second;
      out.feasible = false;
      return out;
    }
  }

  if (want_minimal) {
    IpmResult tm = minimize_over_lmi(sdp.prob, opts.ipm, &eta);
    eta = polish_trace_min(sdp, tm.x, tm.X);
  }

  out.Xi = to_original(unpack_sym(sdp.xi_p + sdp.kernel * eta, n));
  out.max_eig = lmi_residual(sys, out.Xi).second;
  out.feasible = out.max_eig <= feasibility_tolerance(out.Xi);
  return out;
}

inline StorageSolve storage_solve_riccati(const StateSpace& sys, double eps, bool prebalance) {
  const Index n = sys.order();
  Matrix T = Matrix::Identity(n, n);
  Matrix Tinv = T;
  if (prebalance) std::tie(T, Tinv) = prebalance_pair(sys);
  const StateSpace work(T * sys.A * Tinv, T * sys.B, sys.C * Tinv, sys.D);

  Matrix R = symmetrized(work.D + work.D.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(R, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  const double lmax = es.eigenvalues().maxCoeff();
  if (lmin <= 1e-8 * std::max(1.0, lmax)) {
    if (!(eps > 0.0))
      throw PreconditionError("riccati storage engine: D + D^T is singular; a regularization eps > 0 is required");
    R += 2.0 * eps * Matrix::Identity(R.rows(), R.cols());
  }
  const Matrix Xi_work = positive_real_riccati(work.A, work.B, work.C, R);
  StorageSolve out;
  out.method = CertificateMethod::RegularizedRiccati;
  out.Xi = symmetrized(T.transpose() * Xi_work * T);
  out.max_eig = lmi_residual(sys, out.Xi).second;
  out.feasible = out.max_eig <= feasibility_tolerance(out.Xi);
  return out;
}

}  // namespace detail

/// Positive-real feasibility test. Requires a square, minimal system; returns
/// a certificate with a storage matrix when one exists within tolerance.
inline PassivityCertificate is_passive(const StateSpace& sys, const StorageOptions& opts = {}) {
  require_valid(sys, {.require_square = true, .require_minimal = true}, "is_passive");
  detail::StorageSolve s = detail::storage_solve_ipm(sys, opts, /*want_minimal=*/false);
  PassivityCertificate cert;
  cert.method = s.method;
  cert.max_eig_residual = s.max_eig;
  const double xi_min_floor = 1e-10 * s.Xi.norm();
  Eigen::SelfAdjointEigenSolver<Matrix> xe(s.Xi, Eigen::EigenvaluesOnly);
  cert.feasible = s.feasible && xe.eigenvalues()(0) >= -xi_min_floor;
  if (cert.feasible) {
    Gramian g;
    g.X = s.Xi;
    g.kind = GramianKind::AvailableStorage;
    g.residual = std::max(0.0, s.max_eig);
    cert.Xi = std::move(g);
  }
  return cert;
}

/// Loewner-minimal available storage Xi_min (trace-minimal feasible point of
/// the storage LMI). Auto engine: Riccati fast path when D + D^T > 0,
/// interior-point otherwise; both run in prebalanced coordinates.
inline Gramian min_available_storage(const StateSpace& sys, const StorageOptions& opts = {}) {
  require_valid(sys, {.require_square = true, .require_minimal = true}, "min_available_storage");

  detail::StorageSolve sol;
  bool solved = false;
  const Matrix R = sys.D + sys.D.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> re(symmetrized(R), Eigen::EigenvaluesOnly);
  const bool r_pd = re.eigenvalues()(0) > 1e-8 * std::max(1.0, re.eigenvalues().maxCoeff());

  if (opts.engine == StorageEngine::Riccati) {
    sol = detail::storage_solve_riccati(sys, r_pd ? 0.0 : opts.riccati_eps, opts.prebalance);
    solved = true;
  } else if (opts.engine == StorageEngine::Auto && r_pd) {
    try {
      sol = detail::storage_solve_riccati(sys, 0.0, opts.prebalance);
      solved = sol.feasible;
    } catch (const std::exception&) {
      solved = false;
    }
  }
  if (!solved) sol = detail::storage_solve_ipm(sys, opts, opts.minimal);

  if (!sol.feasible) {
    std::ostringstream os;
    os << "min_available_storage: storage LMI infeasible (best max eigenvalue " << sol.max_eig
       << "); the system is not passive";
    throw InfeasibleError(os.str(), sol.max_eig);
  }
  Gramian g;
  g.X = sol.Xi;
  g.kind = GramianKind::AvailableStorage;
  g.residual = std::max(0.0, sol.max_eig);
  return g;
}

/// Loewner-minimal required supply: Pi_min(sys) = Xi_min(dual(sys)).
inline Gramian min_required_supply(const StateSpace& sys, const StorageOptions& opts = {}) {
  Gramian g = min_available_storage(dual_system(sys), opts);
  g.kind = GramianKind::RequiredSupply;
  return g;
}

/// One point of the eps-regularized Riccati route.
struct StorageTrendPoint {
  double eps = 0.0;
  Gramian Xi;
};

inline Gramian riccati_available_storage(const StateSpace& sys, double eps,
                                         bool prebalance = true) {
  require_valid(sys, {.require_square = true, .require_minimal = true},
                "riccati_available_storage");
  detail::StorageSolve s = detail::storage_solve_riccati(sys, eps, prebalance);
  Gramian g;
  g.X = s.Xi;
  g.kind = GramianKind::AvailableStorage;
  g.residual = std::max(0.0, s.max_eig);
  return g;
}

/// Solve the regularized Riccati route for a ladder of eps values so the
/// convergence trend toward the singular-feedthrough limit is visible.
inline std::vector<StorageTrendPoint> riccati_storage_trend(
    const StateSpace& sys, const std::vector<double>& eps_list = {1e-4, 1e-6, 1e-8}) {
  std::vector<StorageTrendPoint> out;
  for (double e : eps_list) {
    StorageTrendPoint pt;
    pt.eps = e;
    pt.Xi = riccati_available_storage(sys, e);
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace structmor
