#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include "structmor/errors.hpp"
#include "structmor/interconnection.hpp"
#include "structmor/state_space.hpp"
#include "structmor/types.hpp"

namespace structmor {

/// Planar bending beam discretized with 2-node Hermite elements; DOFs per
/// node are (w, theta). Only bending is modeled (no axial DOFs).
struct BeamConfig {
  double length = 1.0;              // m
  double youngs_modulus = 2e11;     // Pa
  double density = 8e3;             // kg/m^3
  double cross_section_area = 1e-4; // m^2 (square section)
  double second_moment_area = 1e-4 * 1e-4 / 12.0;  // m^4, a^4/12 for a square side a
  int n_elements = 5;
  std::vector<Index> fixed_dofs;    // global DOF indices removed by supports
  std::vector<Index> io_dofs;       // global DOF indices with collocated force/velocity channels

  Index n_dofs() const { return 2 * (static_cast<Index>(n_elements) + 1); }

  void check() const {
    if (length <= 0 || youngs_modulus <= 0 || density <= 0 || cross_section_area <= 0 ||
        second_moment_area <= 0 || n_elements < 1)
      throw PreconditionError("beam config: physical quantities must be positive");
    std::set<Index> fixed(fixed_dofs.begin(), fixed_dofs.end());
    for (Index d : fixed_dofs)
      if (d < 0 || d >= n_dofs()) throw PreconditionError("beam config: fixed DOF out of range");
    for (Index d : io_dofs) {
      if (d < 0 || d >= n_dofs()) throw PreconditionError("beam config: io DOF out of range");
      if (fixed.count(d)) throw PreconditionError("beam config: io DOF coincides with a fixed DOF");
    }
  }
};

/// Second-order structural model M q'' + Dd q' + K q = F u.
struct SecondOrderModel {
  Matrix M, Dd, K;
  Matrix F;
};

/// Euler-Bernoulli bending element (consistent mass), DOFs (w1, t1, w2, t2).
inline std::pair<Matrix, Matrix> beam_element(double E, double I, double rho, double A,
                                              double ell) {
  if (E <= 0 || I <= 0 || rho <= 0 || A <= 0 || ell <= 0)
    throw PreconditionError("beam_element: inputs must be positive");
  const double l = ell, l2 = ell * ell;
  Matrix k(4, 4), m(4, 4);
  k << 12, 6 * l, -12, 6 * l,
      6 * l, 4 * l2, -6 * l, 2 * l2,
      -12, -6 * l, 12, -6 * l,
      6 * l, 2 * l2, -6 * l, 4 * l2;
  k *= E * I / (l2 * l);
  m << 156, 22 * l, 54, -13 * l,
      22 * l, 4 * l2, 13 * l, -3 * l2,
      54, 13 * l, 156, -22 * l,
      -13 * l, -3 * l2, 22 * l, 4 * l2;
  m *= rho * A * l / 420.0;
  return {k, m};
}

/// Assemble, apply the supports (row/column deletion) and place unit force
/// maps on the io DOFs.
inline SecondOrderModel assemble_beam(const BeamConfig& cfg) {
  cfg.check();
  const Index N = cfg.n_dofs();
  const double ell = cfg.length / cfg.n_elements;
  auto [ke, me] = beam_element(cfg.youngs_modulus, cfg.second_moment_area, cfg.density,
                               cfg.cross_section_area, ell);
  Matrix K = Matrix::Zero(N, N), M = Matrix::Zero(N, N);
  for (int e = 0; e < cfg.n_elements; ++e) {
    const Index o = 2 * e;
    K.block(o, o, 4, 4) += ke;
    M.block(o, o, 4, 4) += me;
  }

  std::set<Index> fixed(cfg.fixed_dofs.begin(), cfg.fixed_dofs.end());
  std::vector<Index> free_dofs;
  for (Index d = 0; d < N; ++d)
    if (!fixed.count(d)) free_dofs.push_back(d);
  if (free_dofs.empty()) throw PreconditionError("assemble_beam: no free DOFs remain");

  const Index nf = static_cast<Index>(free_dofs.size());
  SecondOrderModel model;
  model.K.resize(nf, nf);
  model.M.resize(nf, nf);
  for (Index i = 0; i < nf; ++i)
    for (Index j = 0; j < nf; ++j) {
      model.K(i, j) = K(free_dofs[static_cast<size_t>(i)], free_dofs[static_cast<size_t>(j)]);
      model.M(i, j) = M(free_dofs[static_cast<size_t>(i)], free_dofs[static_cast<size_t>(j)]);
    }
  model.Dd = Matrix::Zero(nf, nf);

  model.F = Matrix::Zero(nf, static_cast<Index>(cfg.io_dofs.size()));
  for (size_t c = 0; c < cfg.io_dofs.size(); ++c) {
    auto it = std::find(free_dofs.begin(), free_dofs.end(), cfg.io_dofs[c]);
    model.F(static_cast<Index>(it - free_dofs.begin()), static_cast<Index>(c)) = 1.0;
  }
  return model;
}

/// Rayleigh damping Dd = alpha M + beta K.
inline Matrix rayleigh(const Matrix& M, const Matrix& K, double alpha, double beta) {
  if (M.rows() != K.rows() || M.cols() != K.cols())
    throw DimensionError("rayleigh: M and K must have equal size");
  return alpha * M + beta * K;
}

/// First-order form x = [q; q'] with collocated force inputs and velocity
/// outputs:
///   A = [[0, I], [-M^-1 K, -M^-1 Dd]],  B = [[0], [M^-1 F]],
///   C = [0, F^T],  D = 0.
inline StateSpace to_statespace(const SecondOrderModel& model) {
  const Index nq = model.M.rows();
  const Index q = model.F.cols();
  Eigen::LLT<Matrix> mllt(symmetrized(model.M));
  if (mllt.info() != Eigen::Success)
    throw PreconditionError("to_statespace: mass matrix is not positive definite");
  Matrix A = Matrix::Zero(2 * nq, 2 * nq);
  A.topRightCorner(nq, nq) = Matrix::Identity(nq, nq);
  A.bottomLeftCorner(nq, nq) = -mllt.solve(model.K);
  A.bottomRightCorner(nq, nq) = -mllt.solve(model.Dd);
  Matrix B = Matrix::Zero(2 * nq, q);
  B.bottomRows(nq) = mllt.solve(model.F);
  Matrix C = Matrix::Zero(q, 2 * nq);
  C.rightCols(nq) = model.F.transpose();
  return StateSpace(std::move(A), std::move(B), std::move(C), Matrix::Zero(q, q));
}

/// Rayleigh coefficients used by the coupled-beam benchmark: modal damping
/// 0.5*(1/w + 5e-6*w).
constexpr double kBenchRayleighAlpha = 1.0;
constexpr double kBenchRayleighBeta = 5e-6;

/// Two 1 m steel beams, five elements each. Beam 1 is clamped at the left end
/// and carries (w, theta) channels at its free right end; beam 2 rests on two
/// supports (w fixed at nodes 2 and 4) and carries (w, theta) at its left end
/// and w at its right end. The beams are joined by a translational damper
/// (50 Ns/m) and a rotational damper (3 Nms/rad); the single external channel
/// is the w force/velocity at beam 2's right end.
inline std::pair<SubsystemSet, InterconnectionTopology> build_beam_benchmark(int n_elements = 5) {
  auto make = [&](std::vector<Index> fixed, std::vector<Index> io) {
    BeamConfig cfg;
    cfg.n_elements = n_elements;
    cfg.fixed_dofs = std::move(fixed);
    cfg.io_dofs = std::move(io);
    SecondOrderModel m = assemble_beam(cfg);
    m.Dd = rayleigh(m.M, m.K, kBenchRayleighAlpha, kBenchRayleighBeta);
    return to_statespace(m);
  };

  const Index last_w = 2 * static_cast<Index>(n_elements);  // w DOF of the right-end node
  // beam 1: clamp node 1 (w, theta); channels at the free right end
  StateSpace beam1 = make({0, 1}, {last_w, last_w + 1});
  // beam 2: w fixed at nodes 2 and 4; channels (w, theta) left + w right
  StateSpace beam2 = make({2, 6}, {0, 1, last_w});

  SubsystemSet set;
  set.subsystems = {std::move(beam1), std::move(beam2)};

  InterconnectionTopology topo;
  topo.S = Matrix::Zero(5, 5);
  const double d_t = 50.0, d_r = 3.0;
  topo.S(0, 0) = d_t;
  topo.S(2, 2) = d_t;
  topo.S(0, 2) = -d_t;
  topo.S(2, 0) = -d_t;
  topo.S(1, 1) = d_r;
  topo.S(3, 3) = d_r;
  topo.S(1, 3) = -d_r;
  topo.S(3, 1) = -d_r;
  topo.Bcal = Matrix::Zero(5, 1);
  topo.Bcal(4, 0) = 1.0;
  return {std::move(set), std::move(topo)};
}

}  // namespace structmor
