#pragma once

#include <optional>

#include "structmor/lyapunov.hpp"

namespace structmor {

enum class CertificateMethod { Sdp, RegularizedRiccati };

/// Outcome of a positive-real feasibility test. When feasible, Xi holds a
/// storage matrix whose LMI block has max eigenvalue <= the scaled tolerance.
struct PassivityCertificate {
  bool feasible = false;
  std::optional<Gramian> Xi;
  double max_eig_residual = std::numeric_limits<double>::infinity();
  CertificateMethod method = CertificateMethod::Sdp;
};

}  // namespace structmor
