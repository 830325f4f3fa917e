#include <catch2/catch_amalgamated.hpp>

#include <unsupported/Eigen/KroneckerProduct>

#include "structmor/lyapunov.hpp"
#include "test_support.hpp"

using namespace structmor;
using namespace structmor::testing;

namespace {

// independent oracle: (I (x) A + A (x) I) vec(X) = -vec(W)
Matrix kronecker_lyapunov(const Matrix& A, const Matrix& W) {
  const Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix op = Eigen::kroneckerProduct(I, A).eval() + Eigen::kroneckerProduct(A, I).eval();
  const Eigen::Map<const Vector> wvec(W.data(), n * n);
  Vector xvec = op.fullPivLu().solve(-wvec);
  return Eigen::Map<Matrix>(xvec.data(), n, n);
}

}  // namespace

TEST_CASE("solve_lyapunov desk cases", "[lyapunov]") {
  SECTION("scalar -2x + 1 = 0") {
    Matrix A(1, 1), W(1, 1);
    A << -1;
    W << 1;
    CHECK(solve_lyapunov(A, W)(0, 0) == Catch::Approx(0.5).margin(1e-14));
  }

  SECTION("oscillator with W = B B^T") {
    const StateSpace sys = msd_system();
    const Matrix X = solve_lyapunov(sys.A, sys.B * sys.B.transpose());
    Matrix expect(2, 2);
    expect << 0.5, 0, 0, 0.5;
    CHECK((X - expect).norm() < 1e-12);
  }

  SECTION("random A against the Kronecker oracle") {
    Rng rng(5);
    const StateSpace sys = random_stable_minimal(rng, 8, 2, 2);
    const Matrix W = Matrix::Identity(8, 8);
    const Matrix X = solve_lyapunov(sys.A, W);
    const double res = (sys.A * X + X * sys.A.transpose() + W).norm();
    CHECK(res <= 1e-10 * (sys.A.norm() * X.norm() + W.norm()));
    CHECK((X - kronecker_lyapunov(sys.A, W)).norm() < 1e-8 * (1.0 + X.norm()));
  }

  SECTION("non-Hurwitz A names the offending eigenvalue") {
    Matrix A(1, 1), W(1, 1);
    A << 0.5;
    W << 1;
    CHECK_THROWS_WITH(solve_lyapunov(A, W), Catch::Matchers::ContainsSubstring("0.5"));
  }

  SECTION("asymmetric W rejected") {
    Matrix A(2, 2), W(2, 2);
    A << -1, 0, 0, -2;
    W << 0, 1, 0, 0;
    CHECK_THROWS_AS(solve_lyapunov(A, W), PreconditionError);
  }
}

TEST_CASE("solution paths agree (Schur vs Kronecker)", "[lyapunov]") {
  Rng rng(17);
  for (Index n : {2, 5, 9, 12}) {
    const StateSpace sys = random_stable_minimal(rng, n, 2, 2);
    const Matrix W = random_spd(rng, n);
    const Matrix X = solve_lyapunov(sys.A, W);
    const Matrix Y = kronecker_lyapunov(sys.A, W);
    REQUIRE((X - Y).norm() <= 1e-8 * (1.0 + X.norm()));
  }
}

TEST_CASE("gramian desk cases", "[lyapunov]") {
  SECTION("scalar controllability") {
    CHECK(controllability_gramian(first_order()).X(0, 0) == Catch::Approx(0.5).margin(1e-14));
  }

  SECTION("scalar observability") {
    CHECK(observability_gramian(first_order()).X(0, 0) == Catch::Approx(0.5).margin(1e-14));
  }

  SECTION("oscillator P = diag(0.5, 0.5)") {
    const Gramian P = controllability_gramian(msd_system());
    Matrix expect(2, 2);
    expect << 0.5, 0, 0, 0.5;
    CHECK((P.X - expect).norm() < 1e-12);
    CHECK(P.residual < 1e-12);
  }

  SECTION("oscillator Q against Kronecker oracle") {
    const StateSpace sys = msd_system();
    const Gramian Q = observability_gramian(sys);
    const Matrix oracle = kronecker_lyapunov(sys.A.transpose(), sys.C.transpose() * sys.C);
    CHECK((Q.X - oracle).norm() < 1e-12);
  }

  SECTION("P(sys) = Q(dual(sys))") {
    Rng rng(23);
    const StateSpace sys = random_stable_minimal(rng, 6, 2, 2);
    const Gramian P = controllability_gramian(sys);
    const Gramian Qd = observability_gramian(dual_system(sys));
    CHECK((P.X - Qd.X).norm() < 1e-12 * (1.0 + P.X.norm()));
  }

  SECTION("state-space-symmetric system has Q = P") {
    Rng rng(31);
    const StateSpace sys = random_symmetric_passive(rng, 4, 2, false);
    const Gramian P = controllability_gramian(sys);
    const Gramian Q = observability_gramian(sys);
    CHECK((P.X - Q.X).norm() < 1e-10 * (1.0 + P.X.norm()));
  }
}

TEST_CASE("gramian transformation law", "[lyapunov]") {
  Rng rng(47);
  const StateSpace sys = random_stable_minimal(rng, 5, 2, 2);
  const Matrix T = random_nonsingular(rng, 5);
  const StateSpace ts = similarity_transform(sys, T);
  const Matrix P = controllability_gramian(sys).X;
  const Matrix Q = observability_gramian(sys).X;
  const Matrix Pt = controllability_gramian(ts).X;
  const Matrix Qt = observability_gramian(ts).X;
  const Matrix Tinv = T.inverse();
  CHECK((Pt - T * P * T.transpose()).norm() < 1e-8 * (1.0 + Pt.norm()));
  CHECK((Qt - Tinv.transpose() * Q * Tinv).norm() < 1e-8 * (1.0 + Qt.norm()));
}

TEST_CASE("gramians positive definite exactly for minimal systems", "[lyapunov]") {
  Rng rng(53);
  const StateSpace good = random_stable_minimal(rng, 4, 1, 1);
  const Matrix P = controllability_gramian(good).X;
  Eigen::SelfAdjointEigenSolver<Matrix> es(P, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues()(0) > 0.0);

  // uncontrollable second state: P singular, flags agree
  Matrix A(2, 2), B(2, 1), C(1, 2), D(1, 1);
  A << -1, 0, 0, -2;
  B << 1, 0;
  C << 1, 1;
  D << 0;
  const StateSpace bad(A, B, C, D);
  CHECK_FALSE(validate(bad).minimal);
  const Matrix Pb = controllability_gramian(bad).X;
  Eigen::SelfAdjointEigenSolver<Matrix> esb(Pb, Eigen::EigenvaluesOnly);
  CHECK(esb.eigenvalues()(0) < 1e-12);
}
