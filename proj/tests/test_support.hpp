#pragma once

#include <random>

#include "structmor/interconnection.hpp"
#include "structmor/state_space.hpp"
#include "structmor/types.hpp"

namespace structmor::testing {

using Rng = std::mt19937;

inline Matrix random_matrix(Rng& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

inline Matrix random_spd(Rng& rng, Index n, double ridge = 0.1) {
  const Matrix m = random_matrix(rng, n, n);
  return symmetrized(m * m.transpose()) + ridge * Matrix::Identity(n, n);
}

inline Matrix random_psd(Rng& rng, Index n) {
  const Matrix m = random_matrix(rng, n, std::max<Index>(1, n - 1));
  return symmetrized(m * m.transpose());
}

inline Matrix random_skew(Rng& rng, Index n) {
  const Matrix m = random_matrix(rng, n, n);
  return 0.5 * (m - m.transpose());
}

inline Matrix random_nonsingular(Rng& rng, Index n, double cond_limit = 1e4) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    Matrix T = random_matrix(rng, n, n);
    Eigen::JacobiSVD<Matrix> svd(T);
    const double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);
    if (std::isfinite(cond) && cond < cond_limit) return T;
  }
  return Matrix::Identity(n, n);
}

/// Random stable minimal system: shifted random A, generic B and C.
inline StateSpace random_stable_minimal(Rng& rng, Index n, Index inputs, Index outputs) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Matrix A = random_matrix(rng, n, n);
    const double max_re = eigenvalues_of(A).real().maxCoeff();
    A -= (max_re + 0.3 + std::uniform_real_distribution<double>(0.0, 1.0)(rng)) *
         Matrix::Identity(n, n);
    StateSpace sys(A, random_matrix(rng, n, inputs), random_matrix(rng, outputs, n),
                   Matrix::Zero(outputs, inputs));
    const ValidationReport rep = validate(sys);
    if (rep.stable && rep.minimal) return sys;
  }
  throw std::runtime_error("random_stable_minimal: generation failed");
}

/// Random passive system from dissipative structure: A = (J - R) Qm with
/// J skew, R > 0, Qm > 0, B generic, C = B^T Qm, D = D0 >= 0. The storage
/// matrix Qm certifies the positive-real LMI by construction.
inline StateSpace random_passive(Rng& rng, Index n, Index p, bool strict_feedthrough,
                                 bool require_minimal = true) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const Matrix J = random_skew(rng, n);
    const Matrix R = random_spd(rng, n, 0.2);
    const Matrix Qm = random_spd(rng, n, 0.3);
    const Matrix B = random_matrix(rng, n, p);
    Matrix D = Matrix::Zero(p, p);
    if (strict_feedthrough) D = random_spd(rng, p, 0.3);
    StateSpace sys((J - R) * Qm, B, B.transpose() * Qm, D);
    if (!require_minimal) return sys;
    const ValidationReport rep = validate(sys);
    if (rep.stable && rep.minimal) return sys;
  }
  throw std::runtime_error("random_passive: generation failed");
}

/// State-space symmetric passive system (A = A^T, C = B^T, D = D^T).
inline StateSpace random_symmetric_passive(Rng& rng, Index n, Index p, bool strict_feedthrough) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const Matrix R = random_spd(rng, n, 0.2);
    const Matrix B = random_matrix(rng, n, p);
    Matrix D = Matrix::Zero(p, p);
    if (strict_feedthrough) D = random_spd(rng, p, 0.3);
    StateSpace sys(-R, B, B.transpose(), D);
    const ValidationReport rep = validate(sys);
    if (rep.stable && rep.minimal) return sys;
  }
  throw std::runtime_error("random_symmetric_passive: generation failed");
}

inline InterconnectionTopology random_topology(Rng& rng, Index p_b, Index p_c) {
  InterconnectionTopology topo;
  topo.S = random_psd(rng, p_b);
  topo.Bcal = random_matrix(rng, p_b, p_c);
  return topo;
}

/// The damped oscillator used throughout the desk examples:
/// A = [[0,1],[-1,-1]], B = [0;1], C = [0,1], D = 0.
inline StateSpace msd_system() {
  Matrix A(2, 2), B(2, 1), C(1, 2), D(1, 1);
  A << 0, 1, -1, -1;
  B << 0, 1;
  C << 0, 1;
  D << 0;
  return StateSpace(A, B, C, D);
}

/// First-order unit system A=-1, B=C=1, D=0.
inline StateSpace first_order() {
  Matrix A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << -1;
  B << 1;
  C << 1;
  D << 0;
  return StateSpace(A, B, C, D);
}

inline StateSpace scalar_system(double a, double b, double c, double d) {
  Matrix A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << a;
  B << b;
  C << c;
  D << d;
  return StateSpace(A, B, C, D);
}

}  // namespace structmor::testing
