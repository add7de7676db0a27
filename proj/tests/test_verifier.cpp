// SPDX-License-Identifier: Apache-2.0
//
// twr-relay: power-minimizing designs for wirelessly powered two-way relaying
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "twr/verify/verifier.hpp"
#include "twr/multipair/multipair.hpp"
#include "twr/onepair/onepair.hpp"

#include <doctest.h>
#include <json.hpp>

#include <random>

using namespace twr;

namespace {

struct Solved {
  Scenario s;
  DesignSolution sol;
};

Solved onepair_instance(std::uint64_t seed) {
  Solved out{generate_scenario(seed, 6, 1), {}};
  const auto r = solve_onepair(out.s);
  REQUIRE(r.report.status == SolveStatus::optimal);
  out.sol = r.solution;
  return out;
}

}  // namespace

TEST_CASE("optimal one-pair design passes and constructed violations fail") {
  auto [s, sol] = onepair_instance(3);
  const auto ok = check_p1(s, sol, 1e-6);
  CHECK(ok.pass);
  CHECK(property1_residual(s, sol)[0] <= 1e-6);

  DesignSolution half = sol;
  for (auto& q : half.q) q *= 0.5;
  const auto up = check_p1(s, half, 1e-6);
  CHECK_FALSE(up.pass);
  CHECK(up.worst == "uplink");
  CHECK(up.uplink > 0.0);

  Scenario poor = s;
  for (auto& e : poor.E) e = 0.5 * poor.p_c;
  DesignSolution full = sol;
  for (auto& b : full.beta) b = 1.0;
  const auto hv = check_p1(poor, full, 1e-6);
  CHECK_FALSE(hv.pass);
  CHECK(hv.harvest > 0.0);
  CHECK(hv.worst == "harvest");
}

TEST_CASE("pass flag agrees with the residuals") {
  auto [s, sol] = onepair_instance(4);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (int t = 0; t < 200; ++t) {
    DesignSolution d = sol;
    for (auto& q : d.q) q *= u(rng);
    for (auto& b : d.beta) b = std::min(1.0, b * u(rng));
    for (double tol : {0.0, 1e-6, 1e-2, 0.3}) {
      const auto r = check_p1(s, d, tol);
      CHECK(r.pass == (r.max_residual() <= tol));
      CHECK(r.tol == tol);
    }
  }
}

TEST_CASE("malformed designs are reported, not thrown") {
  const Scenario s = generate_scenario(5, 4, 2);
  DesignSolution empty;
  FeasibilityReport r;
  CHECK_NOTHROW(r = check_p1(s, empty, 1e-6));
  CHECK_FALSE(r.pass);
}

TEST_CASE("property 1 residual") {
  Scenario s;
  s.N = 2;
  s.K = 1;
  s.h = s.g = UserMap<CVec>(1);
  s.h(0, 0) = CVec(2);
  s.h(0, 0) << cplx(1.0, 0.0), cplx(1.0, 0.0);
  s.h(1, 0) = CVec(2);
  s.h(1, 0) << cplx(1.0, 0.0), cplx(-1.0, 0.0);
  s.g = s.h;
  s.rate = UserMap<double>(1, 1.5);
  s.E = s.rho = UserMap<double>(1, 1.0);
  s.sigma_r2 = s.sigma_u2 = s.sigma_z2 = 1e-9;
  s.eta = 0.8;
  s.p_c = 0.01;
  DesignSolution d;
  d.w = {CVec::Unit(2, 0)};
  d.q = UserMap<double>(1, 0.25);
  CHECK(property1_residual(s, d)[0] == 0.0);

  // arbitrary split: reported, no exception
  d.q(1, 0) = 1e-3;
  std::vector<double> r;
  CHECK_NOTHROW(r = property1_residual(s, d));
  CHECK(r[0] > 0.1);
}

TEST_CASE("report serializes to JSON") {
  auto [s, sol] = onepair_instance(6);
  DesignSolution half = sol;
  for (auto& q : half.q) q *= 0.5;
  const auto r = check_p1(s, half, 1e-6);
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j.at("pass").get<bool>() == false);
  CHECK(j.at("tol").get<double>() == 1e-6);
  CHECK(j.at("worst").get<std::string>() == "uplink");
  for (const char* k : {"uplink", "downlink", "harvest", "norms", "ranges"})
    CHECK(j.at("residuals").contains(k));
  CHECK(j.at("residuals").at("uplink").get<double>() == doctest::Approx(r.uplink));
}

TEST_CASE("local probe on converged DC points") {
  int pass = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Scenario s = generate_scenario(seed, 6, 2);
    const auto c = derive_coefficients(s);
    const auto r = dc_solve(s, c, cp_free_initialize(s, c));
    if (r.report.status != SolveStatus::optimal) continue;
    ++total;
    const auto probe = local_optimality_probe(s, r.solution, 50, 1e-3, seed);
    pass += probe.pass ? 1 : 0;
  }
  INFO(pass << " of " << total);
  CHECK(total >= 18);
  CHECK(pass >= 0.95 * total);
}
