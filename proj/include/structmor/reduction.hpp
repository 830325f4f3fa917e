#pragma once

#include "structmor/balancing.hpp"
#include "structmor/lyapunov.hpp"
#include "structmor/passivity.hpp"
#include "structmor/state_space.hpp"

namespace structmor {

enum class MixedGramianVariant { PXi, PiQ };

namespace detail {

inline ReductionResult reduce_with_pair(const StateSpace& sys, const Matrix& X_i,
                                        const Matrix& X_o, Index r, ReductionMethod method,
                                        bool certify) {
  BalancedRealization bal = balance_with(sys, X_i, X_o);
  ReductionResult res = truncate(bal, r, method);
  if (certify) res.certificate = is_passive(res.reduced);
  return res;
}

}  // namespace detail

/// (P,Q)-balanced truncation. Requires a stable, minimal system.
inline ReductionResult reduce_lyap_bt(const StateSpace& sys, Index r) {
  require_valid(sys, {.require_minimal = true, .require_stable = true}, "reduce_lyap_bt");
  const Gramian P = controllability_gramian(sys);
  const Gramian Q = observability_gramian(sys);
  return detail::reduce_with_pair(sys, P.X, Q.X, r, ReductionMethod::LyapBT, false);
}

/// (Pi,Xi)-balanced truncation; preserves passivity. Requires a stable,
/// minimal, passive system.
inline ReductionResult reduce_pr_bt(const StateSpace& sys, Index r,
                                    const StorageOptions& opts = {}) {
  require_valid(sys, {.require_square = true, .require_minimal = true, .require_stable = true},
                "reduce_pr_bt");
  const Gramian Pi = min_required_supply(sys, opts);
  const Gramian Xi = min_available_storage(sys, opts);
  return detail::reduce_with_pair(sys, Pi.X, Xi.X, r, ReductionMethod::PRBT, true);
}

/// Mixed-Gramian balanced truncation with either (P,Xi) or (Pi,Q); both
/// variants yield the same reduced transfer function and preserve passivity.
inline ReductionResult reduce_mg_bt(const StateSpace& sys, Index r,
                                    MixedGramianVariant variant = MixedGramianVariant::PXi,
                                    const StorageOptions& opts = {}) {
  require_valid(sys, {.require_square = true, .require_minimal = true, .require_stable = true},
                "reduce_mg_bt");
  Matrix X_i, X_o;
  if (variant == MixedGramianVariant::PXi) {
    X_i = controllability_gramian(sys).X;
    X_o = min_available_storage(sys, opts).X;
  } else {
    X_i = min_required_supply(sys, opts).X;
    X_o = observability_gramian(sys).X;
  }
  return detail::reduce_with_pair(sys, X_i, X_o, r, ReductionMethod::MGBT, true);
}

}  // namespace structmor
