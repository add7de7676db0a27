#include "twr/bound/bound.hpp"
#include "twr/multipair/multipair.hpp"
#include "twr/onepair/onepair.hpp"
#include "twr/verify/verifier.hpp"

#include <doctest.h>

#include <random>

using namespace twr;

namespace {

// Appendix-style oracle: p(beta) = max(downlink curve, harvest curve), minimized
// over a grid on (0, 1] followed by golden-section refinement.
double oracle_p(double th_dn, double nr, double su, double sz, double need, double eta) {
  auto f = [&](double b) {
    const double t1 = th_dn / nr * (su + sz / b);
    const double t2 = need / (eta * (1.0 - b) * nr) - su / nr;
    return std::max(t1, t2);
  };
  int best = 1;
  double bv = f(1e-4);
  for (int t = 1; t < 10000; ++t) {
    const double v = f(t / 10000.0);
    if (v < bv) bv = v, best = t;
  }
  double lo = std::max(1e-12, (best - 1) / 10000.0), hi = (best + 1) / 10000.0;
  hi = std::min(hi, 1.0 - 1e-15);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 300; ++it) {
    const double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    if (f(a) < f(b)) hi = b;
    else lo = a;
  }
  return std::min(bv, f(0.5 * (lo + hi)));
}

LargeScaleModel random_model(std::mt19937_64& rng, int N, int K) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LargeScaleModel m;
  m.N = N;
  m.K = K;
  m.rho = m.rate = m.E = UserMap<double>(K);
  for (int x = 0; x < 2 * K; ++x) {
    m.rho[x] = pathloss(1.0 + 9.0 * u(rng));
    m.rate[x] = 0.01 + 1.99 * u(rng);
    m.E[x] = linear_from_dbm(-10.0 + 25.0 * u(rng));
  }
  m.sigma_r2 = m.sigma_u2 = m.sigma_z2 = linear_from_dbm(-60.0 + 20.0 * u(rng));
  m.eta = 0.3 + 0.6 * u(rng);
  m.p_c = linear_from_dbm(10.0);
  return m;
}

}  // namespace

TEST_CASE("fixed point with a single pair is the matched filter") {
  const Scenario s = generate_scenario(1, 6, 1);
  const auto c = derive_coefficients(s);
  const auto fp = uplink_fixed_point(s, c);
  CHECK(fp.converged);
  CHECK(fp.iterations == 2);  // the second step only confirms
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(std::abs(fp.z(i, 0).dot(s.h(i, 0).normalized())) - 1.0) < 1e-12);
    const double w = c.alpha(i, 0) * s.sigma_r2 / s.h(i, 0).squaredNorm();
    CHECK(std::abs(fp.omega(i, 0) - w) <= 1e-12 * w);
  }
}

TEST_CASE("fixed point is monotone and solves its own equation") {
  for (std::uint64_t seed = 2; seed < 8; ++seed) {
    const Scenario s = generate_scenario(seed, 12, 3);
    const auto c = derive_coefficients(s);
    const auto fp = uplink_fixed_point(s, c);
    REQUIRE(fp.feasible);
    CHECK(fp.converged);
    CHECK(fp.iterations <= 500);
    for (size_t n = 1; n < fp.trace.size(); ++n)
      for (int x = 0; x < 6; ++x) CHECK(fp.trace[n][x] >= fp.trace[n - 1][x]);
    const auto [next, z] = fixed_point_step(s, c, fp.omega);
    for (int x = 0; x < 6; ++x) {
      CHECK(std::abs(next[x] - fp.omega[x]) <= 1e-10 * fp.omega[x]);
      CHECK(std::abs(fp.z[x].norm() - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("fixed point detects an infeasible uplink") {
  ScenarioParams prm;
  prm.fixed_rate = 2.0;
  Scenario s = generate_scenario(9, 1, 2, prm);
  const auto c = derive_coefficients(s);
  const auto fp = uplink_fixed_point(s, c);
  CHECK_FALSE(fp.feasible);
  CHECK(lower_bound(s, c).status == SolveStatus::infeasible);
}

TEST_CASE("lower bound sits below the solvers") {
  for (std::uint64_t seed = 20; seed < 23; ++seed) {
    const Scenario s = generate_scenario(seed, 12, 3);
    const auto c = derive_coefficients(s);
    const auto lb = lower_bound(s, c);
    REQUIRE(lb.status == SolveStatus::optimal);
    const auto dc = dc_solve(s, c, cp_free_initialize(s, c));
    REQUIRE(dc.report.status == SolveStatus::optimal);
    CHECK(lb.value <= dc.solution.objective);
    // the relaxed uplink never needs more power than a common receiver
    for (int x = 0; x < 6; ++x) CHECK(lb.uplink.omega[x] <= dc.solution.q[x] * (1.0 + 1e-9));
  }
  for (std::uint64_t seed = 30; seed < 35; ++seed) {
    const Scenario s = generate_scenario(seed, 8, 1);
    const auto c = derive_coefficients(s);
    const auto lb = lower_bound(s, c);
    REQUIRE(lb.status == SolveStatus::optimal);
    const auto one = solve_onepair(s);
    CHECK(lb.value <= one.solution.objective);
  }
}

TEST_CASE("downlink program meets its constraints") {
  const Scenario s = generate_scenario(40, 8, 2);
  const auto c = derive_coefficients(s);
  UserMap<double> mu(2);
  for (int x = 0; x < 4; ++x) mu[x] = std::sqrt(std::max(0.0, 2.0 * s.p_c - 2.0 * s.E[x] + 1e-4));
  const auto d = solve_downlink_power(s, c, mu);
  REQUIRE(d.status == SolveStatus::optimal);
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i) {
      const auto ev = downlink_sinr_rate(s, d.V, d.beta, i, k);
      CHECK(ev.sinr >= c.theta(i, k) * (1.0 - 1e-5));
      const double h = harvested_power(s, d.V, d.beta, i, k);
      CHECK(h >= mu(i, k) * mu(i, k) * (1.0 - 1e-5));
    }
}

TEST_CASE("large-N closed form") {
  SUBCASE("regime 1 example") {
    LargeScaleModel m;
    m.N = 1;
    m.K = 1;
    m.rho = UserMap<double>(1, 1.0);
    m.rate = UserMap<double>(1, 1.0);  // theta = 3 both ways
    m.E = UserMap<double>(1, 100.0);
    m.sigma_r2 = m.sigma_u2 = m.sigma_z2 = 1.0;
    m.eta = 0.5;
    m.p_c = 1.0;
    const auto sol = large_n_solution(m);
    CHECK(sol.regime[0] == 1);
    CHECK(sol.p[0] == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(sol.q[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(sol.beta[0] == 1.0);
    CHECK(oracle_p(3.0, 1.0, 1.0, 1.0, -1.0, 0.5) == doctest::Approx(6.0).epsilon(1e-9));
  }
  SUBCASE("regime 1 powers halve when N doubles") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
      LargeScaleModel m = random_model(rng, 64, 2);
      for (auto& e : m.E) e = 1.0;  // abundant stored energy
      const auto a = large_n_solution(m);
      m.N *= 2;
      const auto b = large_n_solution(m);
      for (int x = 0; x < 4; ++x) {
        REQUIRE(a.regime[x] == 1);
        CHECK(b.p[x] == doctest::Approx(a.p[x] / 2.0).epsilon(1e-15));
        CHECK(b.q[x] == doctest::Approx(a.q[x] / 2.0).epsilon(1e-15));
      }
    }
  }
  SUBCASE("regime 2 matches the splitting oracle") {
    std::mt19937_64 rng(4);
    int seen = 0;
    for (int t = 0; t < 200; ++t) {
      LargeScaleModel m = random_model(rng, 16 << (t % 4), 1);
      const auto sol = large_n_solution(m);
      for (int x = 0; x < 2; ++x) {
        const int i = x % 2;
        const double th = rate_power(m.rate(1 - i, 0)) - 1.0;
        const double nr = m.N * m.rho[x];
        const double need = sol.q[x] + 2.0 * m.p_c - 2.0 * m.E[x];
        CHECK(sol.q[x] == doctest::Approx((rate_power(m.rate[x]) - 1.0) * m.sigma_r2 / nr));
        const double p = oracle_p(th, nr, m.sigma_u2, m.sigma_z2, need, m.eta);
        CHECK(sol.p[x] == doctest::Approx(p).epsilon(1e-6));
        if (sol.regime[x] != 2) continue;
        ++seen;
        const double b = sol.beta[x];
        CHECK(b > 0.0);
        CHECK(b < 1.0);
        const double t1 = th * (m.sigma_u2 + m.sigma_z2 / b);
        const double t2 = need / (m.eta * (1.0 - b)) - m.sigma_u2;
        CHECK(std::abs(t1 - t2) <= 1e-9 * t1);
      }
    }
    CHECK(seen > 100);
  }
}

TEST_CASE("large-N design is feasible on orthogonal channels") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const LargeScaleModel m = random_model(rng, 8, 3);
    const auto sol = large_n_solution(m);
    const Scenario s = orthogonal_scenario(m);
    const auto fr = check_orthogonal_per_user(s, sol.q, sol.p, sol.beta, 1e-9);
    CHECK_MESSAGE(fr.pass, fr.to_json());
    // no slack left in the binding constraints
    UserMap<double> q2 = sol.q;
    for (auto& x : q2) x *= 1.0 - 1e-6;
    CHECK_FALSE(check_orthogonal_per_user(s, q2, sol.p, sol.beta, 1e-9).pass);
  }
  CHECK_THROWS_AS(orthogonal_scenario(random_model(rng, 5, 3)), std::invalid_argument);
}
