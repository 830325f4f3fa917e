#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "structmor/state_space.hpp"
#include "test_support.hpp"

using namespace structmor;
using namespace structmor::testing;

TEST_CASE("validate desk cases", "[state-space]") {
  SECTION("1-state canonical case") {
    const auto rep = validate(first_order(), {.require_square = true});
    CHECK(rep.square);
    CHECK(rep.stable);
    CHECK(rep.minimal);
    CHECK(rep.ok());
  }

  SECTION("damped oscillator stable and minimal") {
    const auto rep = validate(msd_system());
    CHECK(rep.stable);
    CHECK(rep.minimal);
    // characteristic polynomial s^2 + s + 1: roots -0.5 +- j*sqrt(3)/2
    REQUIRE(rep.eigenvalues.size() == 2);
    CHECK(rep.eigenvalues[0].real() == Catch::Approx(-0.5).margin(1e-12));
    CHECK(std::abs(rep.eigenvalues[0].imag()) == Catch::Approx(std::sqrt(3.0) / 2.0).margin(1e-12));
  }

  SECTION("decoupled unreachable state is non-minimal") {
    Matrix A(2, 2), B(2, 1), C(1, 2), D(1, 1);
    A << -1, 0, 0, -2;
    B << 1, 0;
    C << 1, 0;
    D << 0;
    const auto rep = validate(StateSpace(A, B, C, D));
    CHECK(rep.controllability_rank == 1);
    CHECK(rep.observability_rank == 1);
    CHECK_FALSE(rep.minimal);
  }

  SECTION("dimension mismatch is a hard error") {
    Matrix A(2, 2), B(1, 1), C(1, 2), D(1, 1);
    A.setZero();
    B.setZero();
    C.setZero();
    D.setZero();
    CHECK_THROWS_AS(StateSpace(A, B, C, D), DimensionError);
  }
}

TEST_CASE("similarity transform desk cases", "[state-space]") {
  SECTION("identity transform") {
    const StateSpace sys = msd_system();
    const StateSpace t = similarity_transform(sys, Matrix::Identity(2, 2));
    CHECK((t.A - sys.A).norm() == 0.0);
    CHECK((t.B - sys.B).norm() == 0.0);
  }

  SECTION("scalar substitution") {
    const StateSpace sys = scalar_system(-1, 2, 3, 0);
    Matrix T(1, 1);
    T << 2;
    const StateSpace t = similarity_transform(sys, T);
    CHECK(t.A(0, 0) == Catch::Approx(-1.0));
    CHECK(t.B(0, 0) == Catch::Approx(4.0));
    CHECK(t.C(0, 0) == Catch::Approx(1.5));
  }

  SECTION("singular T rejected with condition info") {
    Matrix T = Matrix::Zero(2, 2);
    CHECK_THROWS_AS(similarity_transform(msd_system(), T), PreconditionError);
  }

  SECTION("FRF preserved at desk frequencies") {
    const StateSpace sys = msd_system();
    Matrix T(2, 2);
    T << 2, 0, 0, 1;
    const StateSpace t = similarity_transform(sys, T);
    for (double w : {0.1, 1.0, 10.0}) {
      const ComplexMatrix g0 = transfer_at(sys, w);
      const ComplexMatrix g1 = transfer_at(t, w);
      CHECK((g0 - g1).norm() < 1e-10);
    }
  }
}

TEST_CASE("similarity transform preserves FRF on random systems", "[state-space]") {
  Rng rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + static_cast<Index>(trial % 5);
    const StateSpace sys = random_stable_minimal(rng, n, 2, 2);
    const Matrix T = random_nonsingular(rng, n);
    const StateSpace t = similarity_transform(sys, T);
    for (int k = 0; k < 20; ++k) {
      const double w = std::pow(10.0, -2.0 + 4.0 * k / 19.0);
      const ComplexMatrix g0 = transfer_at(sys, w);
      const ComplexMatrix g1 = transfer_at(t, w);
      REQUIRE((g0 - g1).norm() <= 1e-8 * (1.0 + g0.norm()));
    }
  }
}

TEST_CASE("dual system", "[state-space]") {
  SECTION("transpose of scalars") {
    const StateSpace d = dual_system(scalar_system(-1, 1, 2, 0));
    CHECK(d.B(0, 0) == 2.0);
    CHECK(d.C(0, 0) == 1.0);
  }

  SECTION("self-dual fixed point") {
    Rng rng(7);
    const StateSpace sys = random_symmetric_passive(rng, 3, 2, true);
    const StateSpace d = dual_system(sys);
    CHECK((d.A - sys.A).norm() < 1e-14);
    CHECK((d.B - sys.B).norm() < 1e-14);
    CHECK((d.C - sys.C).norm() < 1e-14);
  }

  SECTION("involution and rank swap") {
    Rng rng(42);
    const StateSpace sys = random_stable_minimal(rng, 4, 2, 2);
    const StateSpace dd = dual_system(dual_system(sys));
    CHECK((dd.A - sys.A).norm() == 0.0);
    const auto r0 = validate(sys);
    const auto r1 = validate(dual_system(sys));
    CHECK(r0.controllability_rank == r1.observability_rank);
    CHECK(r0.observability_rank == r1.controllability_rank);
    const ComplexVector e0 = eigenvalues_of(sys.A);
    const ComplexVector e1 = eigenvalues_of(dual_system(sys).A);
    Vector s0 = e0.cwiseAbs(), s1 = e1.cwiseAbs();
    std::sort(s0.data(), s0.data() + s0.size());
    std::sort(s1.data(), s1.data() + s1.size());
    CHECK((s0 - s1).norm() < 1e-10 * (1.0 + s0.norm()));
  }

  SECTION("non-square rejected") {
    Matrix A(1, 1), B(1, 2), C(1, 1), D(1, 2);
    A << -1;
    B << 1, 0;
    C << 1;
    D << 0, 0;
    CHECK_THROWS_AS(dual_system(StateSpace(A, B, C, D)), DimensionError);
  }
}

TEST_CASE("frequency response desk cases", "[state-space]") {
  SECTION("first order") {
    const auto samples = frequency_response(first_order(), {0.0, 1.0});
    CHECK(std::abs(samples[0].G(0, 0) - Complex(1, 0)) < 1e-14);
    CHECK(std::abs(samples[1].G(0, 0) - Complex(0.5, -0.5)) < 1e-14);
    CHECK(std::abs(std::abs(samples[1].G(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-12);
  }

  SECTION("oscillator at resonance") {
    const auto samples = frequency_response(msd_system(), {1.0});
    CHECK(std::abs(samples[0].G(0, 0) - Complex(1, 0)) < 1e-12);
  }

  SECTION("imaginary-axis eigenvalue marks the sample invalid") {
    Matrix A(2, 2), B(2, 1), C(1, 2), D(1, 1);
    A << 0, 1, -1, 0;  // undamped: eigenvalues +-j
    B << 0, 1;
    C << 1, 0;
    D << 0;
    const auto samples = frequency_response(StateSpace(A, B, C, D), {1.0, 2.0});
    CHECK_FALSE(samples[0].valid);
    CHECK(samples[1].valid);
  }
}

TEST_CASE("step response", "[state-space]") {
  SECTION("first-order analytic solution") {
    const StepResponse r = step_response(first_order(), 0.1, 2.0, 0);
    for (Index k = 0; k < r.t.size(); ++k) {
      const double expect = 1.0 - std::exp(-r.t(k));
      REQUIRE(std::abs(r.y(k, 0) - expect) < 1e-9);
    }
    CHECK(std::abs(r.y(10, 0) - 0.6321205588) < 1e-9);
  }

  SECTION("pure feedthrough") {
    Matrix A(1, 1), B(1, 1), C(1, 1), D(1, 1);
    A << -1;
    B << 0;
    C << 1;
    D << 1;
    const StepResponse r = step_response(StateSpace(A, B, C, D), 0.05, 1.0, 0);
    for (Index k = 0; k < r.t.size(); ++k) REQUIRE(r.y(k, 0) == Catch::Approx(1.0));
  }

  SECTION("oscillator decays; matches a fine-step integration oracle") {
    const StateSpace sys = msd_system();
    const StepResponse r = step_response(sys, 0.02, 40.0, 0);
    CHECK(std::abs(r.y(r.t.size() - 1, 0)) < 1e-3);

    // oracle: exact discretization at dt/10 sampled on the coarse grid
    const StepResponse fine = step_response(sys, 0.002, 40.0, 0);
    for (Index k = 0; k < r.t.size(); k += 50) {
      REQUIRE(std::abs(r.y(k, 0) - fine.y(10 * k, 0)) < 1e-9);
    }
  }

  SECTION("dt and dt/2 agree at common instants") {
    Rng rng(99);
    const StateSpace sys = random_stable_minimal(rng, 5, 2, 3);
    const StepResponse a = step_response(sys, 0.1, 5.0, 1);
    const StepResponse b = step_response(sys, 0.05, 5.0, 1);
    for (Index k = 0; k < a.t.size(); ++k)
      REQUIRE((a.y.row(k) - b.y.row(2 * k)).norm() < 1e-9);
  }

  SECTION("bad arguments") {
    CHECK_THROWS_AS(step_response(first_order(), 0.0, 1.0, 0), PreconditionError);
    CHECK_THROWS_AS(step_response(first_order(), 0.1, 0.05, 0), PreconditionError);
    CHECK_THROWS_AS(step_response(first_order(), 0.1, 1.0, 3), DimensionError);
  }
}
