#pragma once

#include <Eigen/Dense>

#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "structmor/balancing.hpp"
#include "structmor/errors.hpp"
#include "structmor/lyapunov.hpp"
#include "structmor/passivity.hpp"
#include "structmor/state_space.hpp"

namespace structmor {

/// Ordered collection of square subsystems to be interconnected.
struct SubsystemSet {
  std::vector<StateSpace> subsystems;

  std::vector<Index> orders() const {
    std::vector<Index> v;
    v.reserve(subsystems.size());
    for (const auto& s : subsystems) v.push_back(s.order());
    return v;
  }
  std::vector<Index> channels() const {
    std::vector<Index> v;
    v.reserve(subsystems.size());
    for (const auto& s : subsystems) v.push_back(s.inputs());
    return v;
  }
  Index total_order() const {
    Index n = 0;
    for (const auto& s : subsystems) n += s.order();
    return n;
  }
  Index total_channels() const {
    Index p = 0;
    for (const auto& s : subsystems) p += s.inputs();
    return p;
  }
  void check() const {
    if (subsystems.empty()) throw PreconditionError("subsystem set is empty");
    for (size_t j = 0; j < subsystems.size(); ++j) {
      subsystems[j].check_dimensions();
      if (!subsystems[j].square_io()) {
        std::ostringstream os;
        os << "subsystem " << j + 1 << " is not square";
        throw PreconditionError(os.str());
      }
    }
  }
};

/// Negative-feedback coupling v_b = -S z_b + Bcal u_c, y_c = Bcal^T z_b with
/// S positive semidefinite.
struct InterconnectionTopology {
  Matrix S;
  Matrix Bcal;
};

inline void validate_topology(const InterconnectionTopology& topo, Index p_b) {
  if (topo.S.rows() != p_b || topo.S.cols() != p_b)
    throw DimensionError("topology: S must be p_b x p_b");
  if (topo.Bcal.rows() != p_b) throw DimensionError("topology: Bcal must have p_b rows");
  if ((topo.S - topo.S.transpose()).norm() > 1e-10 * (1.0 + topo.S.norm()))
    throw PreconditionError("topology: S must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(topo.S), Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -1e-10 * (1.0 + topo.S.norm()))
    throw PreconditionError("topology: S must be positive semidefinite");
}

/// Block-diagonal parallel composition diag(S_1, ..., S_k).
inline StateSpace parallel_compose(const SubsystemSet& set) {
  set.check();
  const Index n = set.total_order();
  const Index p = set.total_channels();
  Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, p), C = Matrix::Zero(p, n),
         D = Matrix::Zero(p, p);
  Index in = 0, ip = 0;
  for (const auto& s : set.subsystems) {
    const Index nj = s.order(), pj = s.inputs();
    A.block(in, in, nj, nj) = s.A;
    B.block(in, ip, nj, pj) = s.B;
    C.block(ip, in, pj, nj) = s.C;
    D.block(ip, ip, pj, pj) = s.D;
    in += nj;
    ip += pj;
  }
  return StateSpace(std::move(A), std::move(B), std::move(C), std::move(D));
}

/// Close the feedback loop:
///   A_c = A_b - B_b D2 S C_b,  B_c = B_b D2 Bcal,
///   C_c = Bcal^T D1 C_b,       D_c = Bcal^T D_b D2 Bcal,
/// with D1 = (I + D_b S)^-1 and D2 = (I + S D_b)^-1.
inline StateSpace couple(const StateSpace& composed, const InterconnectionTopology& topo,
                         double condition_limit = 1e12) {
  composed.check_dimensions();
  if (!composed.square_io()) throw PreconditionError("couple: composed system must be square");
  const Index p_b = composed.inputs();
  validate_topology(topo, p_b);

  const Matrix I = Matrix::Identity(p_b, p_b);
  const Matrix M1 = I + composed.D * topo.S;
  const Matrix M2 = I + topo.S * composed.D;
  Eigen::JacobiSVD<Matrix> svd(M2);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  const double cond = smin > 0.0 ? svd.singularValues()(0) / smin
                                 : std::numeric_limits<double>::infinity();
  if (!std::isfinite(cond) || cond > condition_limit) {
    std::ostringstream os;
    os << "couple: I + S D_b is singular or ill conditioned (condition estimate " << cond << ")";
    throw PreconditionError(os.str());
  }
  const Matrix D1inv = M1.partialPivLu().inverse();
  const Matrix D2inv = M2.partialPivLu().inverse();

  return StateSpace(composed.A - composed.B * D2inv * topo.S * composed.C,
                    composed.B * D2inv * topo.Bcal,
                    topo.Bcal.transpose() * D1inv * composed.C,
                    topo.Bcal.transpose() * composed.D * D2inv * topo.Bcal);
}

inline StateSpace couple(const SubsystemSet& set, const InterconnectionTopology& topo) {
  return couple(parallel_compose(set), topo);
}

/// Gramian of the interconnected system cut along the subsystem state
/// partition; blocks[i][j] is n_i x n_j.
struct PartitionedGramian {
  Matrix full;
  std::vector<std::vector<Matrix>> blocks;

  const Matrix& diagonal_block(size_t j) const { return blocks[j][j]; }
};

inline PartitionedGramian partition_gramian(const Matrix& X, const std::vector<Index>& orders) {
  const Index total = std::accumulate(orders.begin(), orders.end(), Index{0});
  if (X.rows() != total || X.cols() != total)
    throw DimensionError("partition_gramian: block orders do not sum to the matrix size");
  PartitionedGramian out;
  out.full = X;
  out.blocks.resize(orders.size());
  Index ri = 0;
  for (size_t i = 0; i < orders.size(); ++i) {
    Index cj = 0;
    out.blocks[i].resize(orders.size());
    for (size_t j = 0; j < orders.size(); ++j) {
      out.blocks[i][j] = X.block(ri, cj, orders[i], orders[j]);
      cj += orders[j];
    }
    ri += orders[i];
  }
  return out;
}

namespace detail {

inline void check_reduction_orders(const SubsystemSet& set, const std::vector<Index>& r) {
  if (r.size() != set.subsystems.size())
    throw DimensionError("one reduction order per subsystem is required");
  for (size_t j = 0; j < r.size(); ++j)
    if (r[j] < 1 || r[j] > set.subsystems[j].order()) {
      std::ostringstream os;
      os << "subsystem " << j + 1 << ": reduction order " << r[j] << " out of range [1, "
         << set.subsystems[j].order() << "]";
      throw PreconditionError(os.str());
    }
}

inline void require_coupled_stable(const StateSpace& coupled, const char* who) {
  if (!is_hurwitz(coupled.A)) {
    std::ostringstream os;
    os << who << ": the interconnected system is not asymptotically stable; "
       << "the interconnected Gramian equations have no solution";
    throw PreconditionError(os.str());
  }
}

}  // namespace detail

/// Interconnected-systems balanced truncation: each subsystem is balanced with
/// the diagonal blocks (P_jj, Q_jj) of the interconnected Gramians, then
/// truncated and re-coupled. Accurate, but neither stability nor passivity of
/// the result is guaranteed.
struct IsbtResult {
  SubsystemSet reduced;
  StateSpace coupled;
  std::vector<Vector> gamma;
  std::vector<std::string> warnings;
};

inline IsbtResult reduce_isbt(const SubsystemSet& set, const InterconnectionTopology& topo,
                              const std::vector<Index>& r) {
  set.check();
  detail::check_reduction_orders(set, r);
  const StateSpace full = couple(set, topo);
  detail::require_coupled_stable(full, "reduce_isbt");

  const Matrix Pc = solve_lyapunov(full.A, full.B * full.B.transpose());
  const Matrix Qc = solve_lyapunov(full.A.transpose(), full.C.transpose() * full.C);
  const std::vector<Index> orders = set.orders();
  const PartitionedGramian Pp = partition_gramian(Pc, orders);
  const PartitionedGramian Qp = partition_gramian(Qc, orders);

  IsbtResult out;
  for (size_t j = 0; j < set.subsystems.size(); ++j) {
    BalancedRealization bal = balance_with(set.subsystems[j], Pp.diagonal_block(j),
                                           Qp.diagonal_block(j), /*allow_clamp=*/true);
    ReductionResult red = truncate(bal, r[j], ReductionMethod::ISBT);
    for (auto& w : red.warnings) out.warnings.push_back("subsystem " + std::to_string(j + 1) + ": " + w);
    out.gamma.push_back(red.gamma);
    out.reduced.subsystems.push_back(std::move(red.reduced));
  }
  out.coupled = couple(out.reduced, topo);
  return out;
}

enum class PibtVariant { Primal, Dual };

struct PibtSubsystemReport {
  PassivityCertificate certificate;           // fresh feasibility solve on the reduced subsystem
  double truncated_storage_residual = 0.0;    // LMI max eigenvalue at the inherited Gamma_1
  Vector gamma;
};

struct PibtResult {
  SubsystemSet reduced;
  StateSpace coupled;
  std::vector<PibtSubsystemReport> subsystem_reports;
  PassivityCertificate coupled_certificate;   // recomputed from scratch
  std::vector<std::string> warnings;
};

/// Passivity-preserving interconnected balanced truncation.
///
/// Primal: balance subsystem j with the interconnected controllability block
/// P_jj (input side) and its own minimal available storage Xi_j (output side).
/// Dual: required supply Pi_j (input side) against the interconnected
/// observability block Q_jj. Either way the truncated balanced storage
/// Gamma_1 remains a valid LMI solution, so every reduced subsystem and the
/// re-coupled reduced system stay passive.
inline PibtResult reduce_pibt(const SubsystemSet& set, const InterconnectionTopology& topo,
                              const std::vector<Index>& r, PibtVariant variant = PibtVariant::Primal,
                              const StorageOptions& storage_opts = {}) {
  set.check();
  detail::check_reduction_orders(set, r);
  validate_topology(topo, set.total_channels());
  const StateSpace full = couple(set, topo);
  detail::require_coupled_stable(full, "reduce_pibt");

  const std::vector<Index> orders = set.orders();
  PartitionedGramian global;
  if (variant == PibtVariant::Primal)
    global = partition_gramian(solve_lyapunov(full.A, full.B * full.B.transpose()), orders);
  else
    global = partition_gramian(solve_lyapunov(full.A.transpose(), full.C.transpose() * full.C), orders);

  PibtResult out;
  for (size_t j = 0; j < set.subsystems.size(); ++j) {
    const StateSpace& sub = set.subsystems[j];
    Matrix X_i, X_o;
    try {
      if (variant == PibtVariant::Primal) {
        X_i = global.diagonal_block(j);
        X_o = min_available_storage(sub, storage_opts).X;
      } else {
        X_i = min_required_supply(sub, storage_opts).X;
        X_o = global.diagonal_block(j);
      }
    } catch (const DimensionError&) {
      throw;
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "reduce_pibt: subsystem " << j + 1 << ": " << e.what();
      throw PreconditionError(os.str());
    }

    BalancedRealization bal = balance_with(sub, X_i, X_o, /*allow_clamp=*/true);
    ReductionResult red = truncate(bal, r[j], ReductionMethod::PIBT);
    for (auto& w : red.warnings) out.warnings.push_back("subsystem " + std::to_string(j + 1) + ": " + w);

    PibtSubsystemReport rep;
    rep.gamma = red.gamma;
    const Matrix gamma1 = Vector(red.gamma.head(r[j])).asDiagonal();
    rep.truncated_storage_residual =
        variant == PibtVariant::Primal
            ? lmi_residual(red.reduced, gamma1).second
            : lmi_residual(dual_system(red.reduced), gamma1).second;
    rep.certificate = is_passive(red.reduced, storage_opts);
    out.subsystem_reports.push_back(std::move(rep));
    out.reduced.subsystems.push_back(std::move(red.reduced));
  }
  out.coupled = couple(out.reduced, topo);
  out.coupled_certificate = is_passive(out.coupled, storage_opts);
  return out;
}

}  // namespace structmor
