#include "analytic_programs.hpp"
#include "doctest.h"

using namespace isac;
using namespace isac::cone;
using isac::testing::analytic_programs;
using isac::testing::scalar_of;
using isac::testing::trace_of;

TEST_CASE("analytic programs reach their closed-form optimum") {
  for (auto& p : analytic_programs()) {
    CAPTURE(p.name);
    const SolverResult r = solve(p.program);
    CHECK(r.status == SolveStatus::optimal);
    CHECK(r.iterations <= 50000);
    CHECK(std::abs(r.objective - p.optimum) <= 1e-5 * std::max(1.0, std::abs(p.optimum)));
    CHECK(max_violation(verify(p.program, r.blocks)) <= 1e-6);
    CHECK(r.primal_residual <= 1e-6);
  }
}

TEST_CASE("realified and native complex solves agree") {
  for (auto& p : analytic_programs()) {
    CAPTURE(p.name);
    SolverOptions opts;
    opts.eps = 1e-8;
    const SolverResult native = solve(p.program, opts);
    const ConeProgram real_program = realify(p.program);
    const SolverResult real = solve(real_program, opts);
    REQUIRE(real.status == SolveStatus::optimal);
    CHECK(std::abs(native.objective - real.objective) <= 1e-6 * std::max(1.0, std::abs(p.optimum)));
    const BlockValues back = unrealify_values(p.program, real.blocks);
    CHECK(evaluate(p.program.objective(), back) == doctest::Approx(real.objective).epsilon(1e-9));
    CHECK(max_violation(verify(p.program, back)) <= 1e-6);
  }
}

TEST_CASE("realify keeps functional values") {
  std::mt19937_64 rng(3);
  const int n = 4;
  ConeProgram p;
  const int x = p.add_block("X", BlockKind::hermitian, n);
  const CMatrix c = testing::random_hermitian_matrix(rng, n);
  const CMatrix x0 = testing::random_hermitian_matrix(rng, n);
  p.set_objective(trace_of(x, c));
  p.add_constraint("ball", FrobeniusBall{{{{x, 1.0}}, -x0}, 1.0});
  const ConeProgram rp = realify(p);
  REQUIRE(rp.blocks()[0].kind == BlockKind::symmetric);
  REQUIRE(rp.blocks()[0].dim == 2 * n);

  const CMatrix xv = testing::random_hermitian_matrix(rng, n);
  const BlockValues complex_values{xv};
  const BlockValues real_values{realify(HermitianMatrix(xv)).cast<Complex>()};
  CHECK(evaluate(rp.objective(), real_values) ==
        doctest::Approx(evaluate(p.objective(), complex_values)));
  // The embedding doubles squared Frobenius norms.
  CHECK(max_violation(verify(rp, real_values)) ==
        doctest::Approx(std::sqrt(2.0) * max_violation(verify(p, complex_values))));
}

TEST_CASE("verify reports violations independently of the solver") {
  auto p = testing::lambda_max_program(CMatrix::Identity(3, 3), BlockKind::hermitian);
  // Feasible point.
  BlockValues feasible{CMatrix::Identity(3, 3) / 3.0};
  for (const auto& r : verify(p.program, feasible)) CHECK(r.violation < 1e-15);

  // Hand-perturbed: trace 1.25 and a -0.25 eigenvalue.
  CMatrix bad = CMatrix::Zero(3, 3);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.25;
  const auto report = verify(p.program, {bad});
  REQUIRE(report.size() == 2);
  CHECK(report[0].name == "unit trace");
  CHECK(report[0].violation == doctest::Approx(0.25));
  CHECK(report[1].violation == doctest::Approx(0.25));

  // Random Hermitian point: PSD residual = |min(0, lambda_min)|.
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    const CMatrix h = testing::random_hermitian_matrix(rng, 3);
    const double lmin = eig_hermitian(HermitianMatrix(h)).values(0);
    CHECK(verify(p.program, {h})[1].violation == doctest::Approx(std::max(0.0, -lmin)));
  }

  ConeProgram q;
  const int s = q.add_scalar("s");
  q.add_constraint("soc", SecondOrderCone{scalar_of(s, 0.0, 1.0), {scalar_of(s, 1.0)}});
  q.add_constraint("nonneg", Inequality{scalar_of(s, 1.0)});
  const auto soc_report = verify(q, {CMatrix::Constant(1, 1, -3.0)});
  CHECK(soc_report[0].violation == doctest::Approx(2.0));
  CHECK(soc_report[1].violation == doctest::Approx(3.0));
}

TEST_CASE("optimal results satisfy every constraint within eps") {
  for (auto& p : analytic_programs()) {
    const SolverResult r = solve(p.program);
    for (const auto& c : verify(p.program, r.blocks)) {
      CAPTURE(p.name);
      CAPTURE(c.name);
      CHECK(c.violation <= 1e-6);
    }
  }
}

TEST_CASE("solves are deterministic") {
  auto p = analytic_programs()[1];
  const SolverResult a = solve(p.program);
  const SolverResult b = solve(p.program);
  CHECK(a.iterations == b.iterations);
  CHECK(a.state.x == b.state.x);
  CHECK(a.state.y == b.state.y);
}

TEST_CASE("warm start from the optimum converges immediately") {
  auto p = analytic_programs()[0];
  const SolverResult cold = solve(p.program);
  const SolverResult warm = solve(p.program, {}, &cold.state);
  CHECK(warm.status == SolveStatus::optimal);
  CHECK(warm.iterations < cold.iterations / 4 + 2);
  CHECK(warm.objective == doctest::Approx(p.optimum).epsilon(1e-5));

  // Mismatched shapes are ignored rather than misused.
  auto other = analytic_programs()[1];
  const SolverResult r = solve(other.program, {}, &cold.state);
  CHECK(r.status == SolveStatus::optimal);
}

TEST_CASE("infeasible programs are flagged") {
  SUBCASE("empty PSD intersection with a negative trace") {
    ConeProgram p;
    const int x = p.add_block("X", BlockKind::hermitian, 3);
    p.set_objective(trace_of(x, CMatrix::Identity(3, 3)));
    p.add_constraint("trace", Equality{trace_of(x, CMatrix::Identity(3, 3), 1.0)});
    p.add_constraint("psd", PsdCone{{{{x, 1.0}}, {}}});
    CHECK(solve(p).status == SolveStatus::infeasible);
  }
  SUBCASE("contradictory bounds") {
    ConeProgram p;
    const int s = p.add_scalar("s");
    p.set_objective(scalar_of(s, 1.0));
    p.add_constraint("s >= 2", Inequality{scalar_of(s, 1.0, -2.0)});
    p.add_constraint("s <= 1", Inequality{scalar_of(s, -1.0, 1.0)});
    CHECK(solve(p).status == SolveStatus::infeasible);
  }
}

TEST_CASE("iteration cap is reported") {
  auto p = analytic_programs()[1];
  SolverOptions opts;
  opts.max_iters = 5;
  const SolverResult r = solve(p.program, opts);
  CHECK(r.status == SolveStatus::max_iters);
  CHECK(r.iterations == 5);
}

TEST_CASE("malformed programs are rejected") {
  ConeProgram p;
  const int x = p.add_block("X", BlockKind::hermitian, 2);
  p.set_objective(trace_of(x, CMatrix::Identity(3, 3)));
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  ConeProgram q;
  q.add_scalar("s");
  q.add_constraint("bad", Inequality{scalar_of(4, 1.0)});
  CHECK_THROWS_AS(solve(q), std::invalid_argument);

  ConeProgram r;
  const int a = r.add_block("A", BlockKind::hermitian, 2);
  const int b = r.add_block("B", BlockKind::hermitian, 3);
  r.add_constraint("mixed", PsdCone{{{{a, 1.0}, {b, 1.0}}, {}}});
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}
