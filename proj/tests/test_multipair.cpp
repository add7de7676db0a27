#include "twr/multipair/multipair.hpp"
#include "twr/onepair/onepair.hpp"
#include "twr/verify/verifier.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace twr;

namespace {

CVec random_vec(int N, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CVec v(N);
  for (int a = 0; a < N; ++a) v[a] = cplx(n(rng), n(rng));
  return v;
}

}  // namespace

TEST_CASE("phi values") {
  CVec w = CVec::Zero(3), h = CVec::Zero(3);
  w[0] = 1.0;
  h[1] = 5.0;
  CHECK(phi(w, 2.0, h) == 0.0);
  h[0] = cplx(1.0, 1.0);  // |w^H h|^2 = 2
  CHECK(phi(w, 4.0, h) == doctest::Approx(-0.5).epsilon(1e-15));

  std::mt19937_64 rng(1);
  const CVec a = random_vec(6, rng), b = random_vec(6, rng);
  cplx ip = 0.0;
  for (int n = 0; n < 6; ++n) ip += std::conj(a[n]) * b[n];
  CHECK(phi(a, 3.0, b) == doctest::Approx(-std::norm(ip) / 3.0).epsilon(1e-13));
}

TEST_CASE("phi_tilde majorizes phi with matching value and gradient") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  for (int inst = 0; inst < 20; ++inst) {
    const int N = 2 + inst % 6;
    const CVec h = random_vec(N, rng);
    const CVec wn = random_vec(N, rng).normalized();
    const double xin = u(rng);
    CHECK(phi_tilde(wn, xin, wn, xin, h) == doctest::Approx(phi(wn, xin, h)).epsilon(1e-14));
    for (int t = 0; t < 10000; ++t) {
      const CVec w = u(rng) * random_vec(N, rng);
      const double xi = u(rng);
      const double p = phi(w, xi, h);
      REQUIRE(phi_tilde(w, xi, wn, xin, h) >= p - 1e-12 * (1.0 + std::abs(p)));
    }
    // central differences along random real directions of (Re w, Im w, xi)
    const double eps = 1e-6;
    for (int d = 0; d < 5; ++d) {
      const CVec dw = random_vec(N, rng);
      const double dx = u(rng);
      const double fd = (phi(wn + eps * dw, xin + eps * dx, h) - phi(wn - eps * dw, xin - eps * dx, h)) /
                        (2.0 * eps);
      const double lin = phi_tilde(wn + dw, xin + dx, wn, xin, h) - phi_tilde(wn, xin, wn, xin, h);
      CHECK(lin == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("mu linearization lies above -mu^2") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int t = 0; t < 10000; ++t) {
    const double mn = std::abs(u(rng)), m = u(rng);
    REQUIRE(-2.0 * mn * m + mn * mn >= -m * m - 1e-12);
  }
  CHECK(-2.0 * 3.0 * 3.0 + 9.0 == -9.0);
}

TEST_CASE("recover") {
  std::mt19937_64 rng(4);
  const CVec v = random_vec(5, rng).normalized();
  const auto r1 = recover(2.5 * v * v.adjoint());
  CHECK(r1.kind == RecoveredBeamformer::Kind::rank_one);
  CHECK(r1.power == doctest::Approx(2.5));
  CHECK(std::abs(std::abs(r1.v.dot(v)) - 1.0) < 1e-12);
  CHECK((r1.power * r1.v * r1.v.adjoint() - 2.5 * v * v.adjoint()).norm() <= 1e-6 * 2.5);

  CMat D = CMat::Zero(4, 4);
  D(0, 0) = 2.0;
  D(1, 1) = 1.0;
  const auto r2 = recover(D);
  CHECK(r2.alamouti());
  CHECK(r2.power == doctest::Approx(3.0));
  CHECK((r2.F * r2.F.adjoint() - D / 3.0).norm() < 1e-14);
  CHECK((r2.F.adjoint() * r2.F).trace().real() == doctest::Approx(1.0));

  CMat D3 = D;
  D3(2, 2) = 0.5;
  CHECK_THROWS_AS(recover(D3), RankViolation);
}

TEST_CASE("Alamouti blocks") {
  CVec s(2);
  s << 1.0, cplx(0.0, 1.0);
  const auto b = alamouti_blocks(s);
  REQUIRE(b.size() == 1);
  CMat expect(2, 2);
  expect << 1.0, cplx(0.0, 1.0), cplx(0.0, 1.0), 1.0;
  CHECK((b[0] - expect).norm() == 0.0);

  std::mt19937_64 rng(5);
  const CVec sym = random_vec(8, rng);
  const auto bs = alamouti_blocks(sym);
  REQUIRE(bs.size() == 4);
  for (size_t m = 0; m < bs.size(); ++m) {
    const double e = std::norm(sym[2 * m]) + std::norm(sym[2 * m + 1]);
    CHECK((bs[m] * bs[m].adjoint() - e * CMat::Identity(2, 2)).norm() < 1e-13 * e);
  }
  CHECK_THROWS_AS(alamouti_blocks(random_vec(3, rng)), std::invalid_argument);
}

TEST_CASE("downlink basis spans every downlink channel") {
  const Scenario s = generate_scenario(6, 12, 3);
  const CMat B = downlink_basis(s);
  CHECK(B.cols() == 6);
  CHECK((B.adjoint() * B - CMat::Identity(6, 6)).norm() < 1e-12);
  for (const auto& g : s.g) CHECK((B * (B.adjoint() * g) - g).norm() <= 1e-12 * g.norm());
  CHECK(downlink_basis(generate_scenario(6, 4, 3)).cols() == 4);
}

TEST_CASE("convexified program rejects a malformed expansion point") {
  const Scenario s = generate_scenario(7, 6, 2);
  const auto c = derive_coefficients(s);
  DcState st;
  st.w = {CVec::Ones(6).normalized()};
  st.xi = st.mu = UserMap<double>(2, 1.0);
  CHECK_THROWS_AS(build_p2r(s, c, st), std::invalid_argument);
  st.w.push_back(st.w[0]);
  st.xi[1] = 0.0;
  CHECK_THROWS_AS(build_p2r(s, c, st), std::invalid_argument);
}

TEST_CASE("DC solver on three pairs") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const Scenario s = generate_scenario(seed, 12, 3);
    const auto c = derive_coefficients(s);
    const auto ip = cp_free_initialize(s, c);
    REQUIRE(ip.feasible);

    // the expansion point admits a completion in the first program
    const auto prog = build_p2r(s, c, DcState{0, ip.w0, ip.xi0, ip.mu0, 0.0, false});
    const auto first = conic::solve(prog.problem);
    CHECK(first.status == SolveStatus::optimal);
    for (int x = 0; x < 6; ++x) {
      const double b = first.value(prog.beta[x]);
      CHECK(b > 0.0);
      CHECK(b <= 1.0 + 1e-7);
    }

    const auto r = dc_solve(s, c, ip);
    CHECK(r.report.status == SolveStatus::optimal);
    CHECK(r.report.iterations < DcOptions{}.max_iter);
    const auto& tr = r.report.objective_trace;
    for (size_t n = 1; n < tr.size(); ++n) CHECK(tr[n] <= tr[n - 1] * (1.0 + 1e-9));
    CHECK(r.solution.objective <= tr.back() * (1.0 + 1e-9));
    const auto fr = check_p1(s, r.solution, 1e-6);
    CHECK_MESSAGE(fr.pass, fr.to_json());
    for (const auto& rb : r.solution.recovered) CHECK(rb.eig_ratio3 <= 1e-6);
    for (size_t k = 0; k < r.solution.V.size(); ++k) {
      const auto& rb = r.solution.recovered[k];
      const CMat back = rb.alamouti() ? CMat(rb.power * rb.F * rb.F.adjoint())
                                      : CMat(rb.power * rb.v * rb.v.adjoint());
      CHECK((back - r.solution.V[k]).norm() <= 1e-5 * rb.power);
    }

    std::ostringstream os;
    write_dc_trace_csv(os, r.report);
    const std::string csv = os.str();
    CHECK(csv.rfind("n,objective_W,objective_dBm,max_residual\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(tr.size()) + 1);
  }
}

TEST_CASE("DC solver against the one-pair optimum") {
  int close = 0;
  const int n = 10;
  for (int t = 0; t < n; ++t) {
    const Scenario s = generate_scenario(200 + t, 8, 1);
    const auto c = derive_coefficients(s);
    const auto one = solve_onepair(s);
    REQUIRE(one.report.status == SolveStatus::optimal);
    const auto r = dc_solve(s, c, cp_free_initialize(s, c));
    REQUIRE(r.report.status == SolveStatus::optimal);
    CHECK(r.solution.objective >= one.solution.objective * (1.0 - 1e-6));
    if (dbm_from_linear(r.solution.objective) - dbm_from_linear(one.solution.objective) <= 0.5)
      ++close;
  }
  CHECK(close >= 0.9 * n);
}

TEST_CASE("DC solver reports an infeasible initial point") {
  const Scenario s = generate_scenario(14, 8, 2);
  const auto c = derive_coefficients(s);
  InitPoint ip;
  CHECK(dc_solve(s, c, ip).report.status == SolveStatus::infeasible);
}
