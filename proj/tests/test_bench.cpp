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

#include "twr/bench/baselines.hpp"
#include "twr/bench/experiment.hpp"
#include "twr/bound/bound.hpp"
#include "twr/init/initializer.hpp"
#include "twr/multipair/multipair.hpp"
#include "twr/verify/verifier.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace twr;

namespace {

// drops the trailing wall_ms column
std::string strip_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

std::string rows_csv(const ExperimentResult& r) {
  std::ostringstream os;
  write_rows_csv(os, r.rows);
  return os.str();
}

}  // namespace

TEST_CASE("zero-forcing transmit bases") {
  const Scenario s = generate_scenario(2, 7, 4);
  const auto B = zf_transmit_bases(s);
  REQUIRE(B.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK((B[k].adjoint() * B[k] - CMat::Identity(B[k].cols(), B[k].cols())).norm() < 1e-12);
    for (int l = 0; l < 4; ++l)
      for (int i = 0; i < 2; ++i) {
        const double leak = (B[k].adjoint() * s.g(i, l)).norm() / s.g(i, l).norm();
        if (l != k) CHECK(leak < 1e-12);
        else CHECK(leak > 1e-3);
      }
  }
  CHECK_THROWS_AS(zf_transmit_bases(generate_scenario(2, 6, 4)), std::invalid_argument);
  CHECK_THROWS_AS(zf_receive_baseline(generate_scenario(2, 6, 4),
                                      derive_coefficients(generate_scenario(2, 6, 4))),
                  std::invalid_argument);
}

TEST_CASE("baselines are feasible and ordered") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Scenario s = generate_scenario(seed, 12, 3);
    const auto c = derive_coefficients(s);
    const auto zr = zf_receive_baseline(s, c);
    const auto zt = zf_transmit_receive_baseline(s, c);
    REQUIRE(zr.report.status == SolveStatus::optimal);
    REQUIRE(zt.report.status == SolveStatus::optimal);
    CHECK(check_p1(s, zr.solution, 1e-6).pass);
    CHECK(check_p1(s, zt.solution, 1e-6).pass);
    // same receivers, smaller transmit set
    CHECK(zr.solution.objective <= zt.solution.objective * (1.0 + 1e-6));
    CHECK(zr.solution.q == zt.solution.q);
    // zero forcing leaves no inter-pair interference at the relay
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        for (int j = 0; j < 2; ++j)
          if (l != k)
            CHECK(std::abs(zr.solution.w[k].dot(s.h(j, l))) < 1e-9 * s.h(j, l).norm());
    const auto dc = dc_solve(s, c, cp_free_initialize(s, c));
    REQUIRE(dc.report.status == SolveStatus::optimal);
    CHECK(dc.solution.objective <= zr.solution.objective * (1.0 + 1e-6));
    CHECK(lower_bound(s, c).value <= dc.solution.objective);
  }
}

TEST_CASE("zero-forcing receivers approach the bound at high SNR") {
  ScenarioParams prm;
  prm.noise_dbm = -80.0;
  std::vector<double> gaps;
  for (std::uint64_t seed = 1; seed <= 7; ++seed) {
    const Scenario s = generate_scenario(seed, 12, 3, prm);
    const auto c = derive_coefficients(s);
    const auto lb = lower_bound(s, c);
    const auto zr = zf_receive_baseline(s, c);
    REQUIRE(lb.status == SolveStatus::optimal);
    REQUIRE(zr.report.status == SolveStatus::optimal);
    gaps.push_back(dbm_from_linear(zr.solution.objective) - dbm_from_linear(lb.value));
  }
  std::nth_element(gaps.begin(), gaps.begin() + 3, gaps.end());
  CHECK(gaps[3] <= 1.0);
}

TEST_CASE("experiment configuration") {
  auto cfg = ExperimentConfig::preset("fig4");
  CHECK(cfg.K == 3);
  CHECK(cfg.N == 12);
  CHECK(cfg.sweep == Sweep::rate);
  CHECK_NOTHROW(cfg.validate());
  CHECK(ExperimentConfig::preset("fig6").N == 2 * ExperimentConfig::preset("fig6").K - 2);
  CHECK_THROWS_AS(ExperimentConfig::preset("fig9"), std::invalid_argument);

  auto bad = cfg;
  bad.runs = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.values.clear();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.solvers = {"onepair"};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ExperimentConfig::preset("fig6");
  bad.solvers.push_back("zf-receive");
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  const auto j = ExperimentConfig::from_json(
      R"({"experiment": "fig5", "runs": 3, "values": [-70], "params": {"eta": 0.5}})");
  CHECK(j.experiment == "fig5");
  CHECK(j.sweep == Sweep::noise);
  CHECK(j.runs == 3);
  CHECK(j.values == std::vector<double>{-70.0});
  CHECK(j.params.eta == 0.5);
  CHECK(j.solvers == ExperimentConfig::preset("fig5").solvers);
}

TEST_CASE("experiment output is deterministic") {
  ExperimentConfig cfg;
  cfg.K = 2;
  cfg.N = 4;
  cfg.sweep = Sweep::noise;
  cfg.values = {-70.0, -60.0};
  cfg.runs = 3;
  cfg.seed = 11;
  cfg.solvers = {"lower-bound", "dc-cpfree", "zf-receive", "zf-transmit-receive"};
  cfg.trace = true;
  const auto a = run_experiment(cfg);
  cfg.workers = 3;
  const auto b = run_experiment(cfg);
  CHECK(strip_timing(rows_csv(a)) == strip_timing(rows_csv(b)));
  REQUIRE(a.rows.size() == 2 * 3 * 4);
  CHECK(a.rows.front().solver == "lower-bound");
  CHECK(a.rows[4].seed == 12);
  CHECK(rows_csv(a).starts_with("# schema=1\n"));
  CHECK(a.all_verified());
  CHECK(a.ordering_checks > 0);
  CHECK(a.ordering_violations.empty());
  CHECK(!a.traces.empty());

  for (const auto& p : a.summary) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : a.rows)
      if (r.solver == p.solver && r.sweep_value == p.sweep_value && r.counted())
        sum += r.objective_W, ++n;
    CHECK(p.counted == n);
    CHECK(p.runs == 3);
    CHECK(p.mean_W == doctest::Approx(sum / n));
    CHECK(p.mean_dBm == doctest::Approx(dbm_from_linear(sum / n)));
    CHECK(p.mean_of_dBm <= p.mean_dBm + 1e-9);  // Jensen
  }
}

TEST_CASE("infeasible runs are excluded from the means") {
  ExperimentConfig cfg;
  cfg.K = 2;
  cfg.N = 2;
  cfg.sweep = Sweep::rate;
  cfg.values = {0.1, 6.0};
  cfg.runs = 4;
  cfg.solvers = {"lower-bound"};
  const auto r = run_experiment(cfg);
  REQUIRE(r.summary.size() == 2);
  CHECK(r.summary[0].feasibility_rate == 1.0);
  CHECK(r.summary[1].feasibility_rate == 0.0);
  CHECK(std::isnan(r.summary[1].mean_W));
  for (const auto& row : r.rows)
    if (row.sweep_value == 6.0) CHECK(row.status == SolveStatus::infeasible);
  CHECK(r.all_verified());
}
