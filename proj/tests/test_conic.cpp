#include "twr/conic/solver.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <random>
#include <sstream>

using namespace twr;
using namespace twr::conic;

TEST_CASE("one-dimensional bound") {
  ConicProblem p;
  Var x = p.add_var("x");
  p.add_lmi(1, {{0, 0, Affine(x)}});
  p.add_ge(Affine(x) - 1.0);
  p.minimize(x);
  auto sol = solve(p);
  CHECK(sol.status == SolveStatus::optimal);
  CHECK(sol.value(x) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.primal_residual <= kFeasTol);
}

TEST_CASE("hermitian 2x2 trace minimization") {
  ConicProblem p;
  HermVar X = p.add_herm("X", 2, true);
  p.add_ge(X.trace() - 2.0);
  p.add_eq(X.entry(0, 1).re - 1.0);
  p.add_eq(X.entry(0, 1).im);
  p.minimize(X.trace());
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CMat V = sol.value(X);
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(std::abs(V(0, 0) - 1.0) < 1e-6);
  CHECK(std::abs(V(1, 1) - 1.0) < 1e-6);
  CHECK(std::abs(V(0, 1) - 1.0) < 1e-7);
  Eigen::SelfAdjointEigenSolver<CMat> es(V);
  CHECK(es.eigenvalues().minCoeff() > -1e-7);
  // no cheaper diagonal: X11 X22 >= 1 with X11 + X22 minimal at 1, 1
  double best = 1e9;
  for (int i = 1; i <= 400; ++i) {
    const double a = 0.01 * i;
    best = std::min(best, a + 1.0 / a);
  }
  CHECK(sol.objective <= best + 1e-7);
}

TEST_CASE("contradictory bounds are infeasible") {
  ConicProblem p;
  Var x = p.add_var("x");
  p.add_ge(Affine(x) - 1.0);
  p.add_le(x);
  p.minimize(x);
  auto sol = solve(p);
  CHECK(sol.status == SolveStatus::infeasible);
}

TEST_CASE("schur block membership") {
  auto feasible = [](double top, double c, double bottom) {
    ConicProblem p;
    Var t = p.add_var("t");
    p.schur_lmi(top, c, bottom);
    p.add_ge(t);
    p.minimize(t);
    return solve(p).status;
  };
  CHECK(feasible(4.0, 2.0, 1.0) == SolveStatus::optimal);
  CHECK(feasible(1.0, 2.0, 1.0) == SolveStatus::infeasible);
}

TEST_CASE("schur block matches the product form pointwise") {
  // beta * (a - b) >= z^2  <=>  [[a - b, z], [z, beta]] >= 0 for the data below;
  // project each random point onto a fixed value and check feasibility of the
  // resulting zero-dimensional program.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 3.0);
  int agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double a = u(rng), b = u(rng), beta = std::abs(u(rng)) / 3.0 + 0.01, z = 0.5;
    ConicProblem p;
    Var v = p.add_var("v");
    p.schur_lmi(Affine(a - b), Affine(z), Affine(v));
    p.add_eq(Affine(v) - beta);
    p.minimize(v);
    const bool solver_says = solve(p).status == SolveStatus::optimal;
    const bool direct = a - b >= 0 && beta * (a - b) >= z * z;
    if (std::abs(beta * (a - b) - z * z) < 1e-6) {
      ++agree;
      continue;
    }
    agree += solver_says == direct;
  }
  CHECK(agree == 100);
}

TEST_CASE("real embedding preserves definiteness") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    CMat B(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) B(i, j) = cplx(n(rng), n(rng));
    CMat H = trial % 2 ? CMat(B * B.adjoint()) : CMat(B + B.adjoint());
    RMat E = real_embedding(H);
    CHECK((E - E.transpose()).norm() < 1e-14);
    Eigen::SelfAdjointEigenSolver<CMat> ec(H);
    Eigen::SelfAdjointEigenSolver<RMat> er(E);
    // every eigenvalue appears twice
    RVec doubled(8);
    for (int i = 0; i < 4; ++i) doubled[2 * i] = doubled[2 * i + 1] = ec.eigenvalues()[i];
    CHECK((er.eigenvalues() - doubled).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("hermitian variable trace_with") {
  ConicProblem p;
  HermVar X = p.add_herm("X", 3, false);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  RVec x(9);
  for (int i = 0; i < 9; ++i) x[i] = n(rng);
  CMat B(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) B(i, j) = cplx(n(rng), n(rng));
  CMat C = B + B.adjoint();
  CMat V = X.value(x);
  CHECK(std::abs((C * V).trace().real() - X.trace_with(C).evaluate(x)) < 1e-12);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      auto e = X.entry(a, b);
      CHECK(std::abs(cplx(e.re.evaluate(x), e.im.evaluate(x)) - V(a, b)) < 1e-14);
    }
}

TEST_CASE("complex semidefinite program with known optimum") {
  // min Tr(X) s.t. Tr(C X) >= 1, X >= 0 has optimum 1 / lambda_max(C).
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 4;
    CMat B(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) B(i, j) = cplx(n(rng), n(rng));
    CMat C = B * B.adjoint();
    ConicProblem p;
    HermVar X = p.add_herm("X", d, true);
    p.add_ge(X.trace_with(C) - 1.0);
    p.minimize(X.trace());
    auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    Eigen::SelfAdjointEigenSolver<CMat> es(C);
    CHECK(sol.objective == doctest::Approx(1.0 / es.eigenvalues().maxCoeff()).epsilon(1e-7));
  }
}

TEST_CASE("badly scaled variables with scale hints") {
  // min q s.t. q * 1e-6 >= 3e-9 (q in watts), hint 1e-3
  ConicProblem p;
  Var q = p.add_var("q", 1e-3);
  p.add_ge(1e-6 * Affine(q) - 3e-9);
  p.minimize(q);
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.value(q) == doctest::Approx(3e-3).epsilon(1e-7));
}

TEST_CASE("repeated solves are deterministic") {
  ConicProblem p;
  HermVar X = p.add_herm("X", 3, true);
  CMat C = CMat::Identity(3, 3);
  C(0, 1) = cplx(0.3, 0.2);
  C(1, 0) = std::conj(C(0, 1));
  p.add_ge(X.trace_with(C) - 2.0);
  p.add_ge(X.entry(2, 2).re - 0.1);
  p.minimize(X.trace());
  const double a = solve(p).objective, b = solve(p).objective;
  CHECK(std::abs(a - b) <= 1e-9 * std::abs(a));
}

TEST_CASE("debug dump lists every nonzero") {
  ConicProblem p;
  Var x = p.add_var("x");
  HermVar X = p.add_herm("X", 2, true);
  p.add_ge(Affine(x) + X.trace() - 1.0);
  p.minimize(x);
  std::ostringstream os;
  p.dump(os);
  std::string text = os.str();
  CHECK(text.find("# constraint_id") == 0);
  CHECK(text.find("-1 0 0 0 1 0") != std::string::npos);  // objective row
  CHECK(text.find("1 -1 0 0 -1 0") != std::string::npos);  // constant of the linear row
}

TEST_CASE("non-upper LMI entries are rejected") {
  ConicProblem p;
  Var x = p.add_var("x");
  CHECK_THROWS_AS(p.add_lmi(2, {{1, 0, Affine(x)}}), std::invalid_argument);
  CHECK_THROWS_AS(p.add_lmi(2, {{0, 1, ComplexAffine(Affine(x), Affine(1.0))}}),
                  std::invalid_argument);
}
