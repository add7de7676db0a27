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

#include "twr/bench/experiment.hpp"
#include "twr/bound/bound.hpp"
#include "twr/verify/verifier.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace twr;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
  std::string scenario;
  std::string preset;
  std::string solver = "dc-cpfree";
};

void add_common(CLI::App* cmd, Common& o) {
  cmd->add_option("--config", o.config, "JSON configuration file");
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--workers", o.workers, "worker threads");
  cmd->add_option("--out", o.out, "output file");
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ExperimentConfig load_config(const Common& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig::preset(o.preset.empty() ? "custom" : o.preset)
                                          : ExperimentConfig::from_json(slurp(o.config));
  if (o.seed) cfg.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (!o.out.empty()) cfg.out = o.out;
  return cfg;
}

Scenario load_scenario(const Common& o, const ExperimentConfig& cfg) {
  if (!o.scenario.empty()) return scenario_from_json(slurp(o.scenario));
  return generate_scenario(cfg.seed, cfg.N, cfg.K, cfg.params);
}

// Prints to --out when given, stdout otherwise.
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  write(f);
}

int cmd_gen(const Common& o) {
  const auto cfg = load_config(o);
  const Scenario s = generate_scenario(cfg.seed, cfg.N, cfg.K, cfg.params);
  emit(o.out, [&](std::ostream& os) { os << scenario_to_json(s) << '\n'; });
  return 0;
}

int cmd_solve(const Common& o) {
  auto cfg = load_config(o);
  const Scenario s = load_scenario(o, cfg);
  cfg.K = s.K;
  cfg.N = s.N;
  cfg.solvers = {o.solver};
  cfg.validate();
  std::vector<TraceRow> trace;
  ResultRow r = run_solver(o.solver, s, cfg, &trace);
  r.experiment = "solve";
  r.seed = cfg.seed;
  std::printf("%s: %s, %.6f dBm, %d iterations, verified=%d, max residual %.3g\n",
              r.solver.c_str(), to_string(r.status).c_str(), r.objective_dBm, r.iterations,
              r.verified ? 1 : 0, r.max_residual);
  if (!r.message.empty()) std::printf("  %s\n", r.message.c_str());
  if (!o.out.empty()) {
    emit(o.out, [&](std::ostream& os) { write_rows_csv(os, {r}); });
    if (!trace.empty()) {
      for (auto& t : trace) t.seed = cfg.seed;
      emit(o.out + ".trace.csv", [&](std::ostream& os) { write_trace_csv(os, trace); });
    }
  }
  return r.verified ? 0 : 1;
}

int cmd_bench(const Common& o) {
  const auto cfg = load_config(o);
  const auto res = run_experiment(cfg);
  if (cfg.out.empty()) write_rows_csv(std::cout, res.rows);
  write_summary_csv(cfg.out.empty() ? std::cerr : std::cout, res.summary);
  std::fprintf(stderr, "ordering checks: %d, violations: %zu\n", res.ordering_checks,
               res.ordering_violations.size());
  for (const auto& v : res.ordering_violations)
    std::fprintf(stderr, "  seed %llu at %g: %s %.9g W > %s %.9g W\n",
                 static_cast<unsigned long long>(v.seed), v.sweep_value, v.lower.c_str(),
                 v.lower_W, v.upper.c_str(), v.upper_W);
  const bool ok = res.all_verified();
  if (!ok) std::fprintf(stderr, "some rows failed verification\n");
  return ok ? 0 : 1;
}

int cmd_lowerbound(const Common& o) {
  const auto cfg = load_config(o);
  const Scenario s = load_scenario(o, cfg);
  const auto c = derive_coefficients(s);
  const auto lb = lower_bound(s, c);
  std::printf("lower bound: %s, %.9g W (%.6f dBm), relay %.9g W, fixed point %d iterations\n",
              to_string(lb.status).c_str(), lb.value,
              lb.value > 0.0 ? dbm_from_linear(lb.value) : -INFINITY, lb.relay_power,
              lb.uplink.iterations);
  if (!o.out.empty())
    emit(o.out, [&](std::ostream& os) {
      os << "# schema=1\nuser,i,k,omega_W\n";
      os.precision(17);
      for (int k = 0; k < s.K; ++k)
        for (int i = 0; i < 2; ++i)
          os << UserMap<double>::flat(i, k) << ',' << i << ',' << k << ','
             << lb.uplink.omega(i, k) << '\n';
    });
  return lb.status == SolveStatus::optimal && lb.uplink.converged ? 0 : 1;
}

int cmd_largen(const Common& o) {
  const auto cfg = load_config(o);
  const Scenario s = load_scenario(o, cfg);
  const auto m = LargeScaleModel::from(s);
  const auto sol = large_n_solution(m);
  emit(o.out, [&](std::ostream& os) {
    os << "# schema=1\nuser,i,k,q_W,p_W,beta,regime\n";
    os.precision(17);
    for (int k = 0; k < s.K; ++k)
      for (int i = 0; i < 2; ++i)
        os << UserMap<double>::flat(i, k) << ',' << i << ',' << k << ',' << sol.q(i, k) << ','
           << sol.p(i, k) << ',' << sol.beta(i, k) << ',' << sol.regime(i, k) << '\n';
  });
  std::fprintf(stderr, "large-N total: %.9g W (%.6f dBm)\n", sol.total(),
               dbm_from_linear(sol.total()));
  if (m.N < 2 * m.K) return 0;
  const auto fr = check_orthogonal_per_user(orthogonal_scenario(m), sol.q, sol.p, sol.beta,
                                            cfg.verify_tol);
  if (!fr.pass) std::fprintf(stderr, "orthogonal check failed: %s\n", fr.to_json().c_str());
  return fr.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power-minimizing designs for wirelessly powered two-way relaying"};
  app.require_subcommand(1);
  Common o;

  auto* gen = app.add_subcommand("gen", "generate a scenario as JSON");
  add_common(gen, o);

  auto* solve = app.add_subcommand("solve", "solve one scenario");
  add_common(solve, o);
  solve->add_option("--scenario", o.scenario, "scenario JSON (default: generate from config)");
  solve->add_option("--solver", o.solver, "solver name")->capture_default_str();

  auto* bench = app.add_subcommand("bench", "run a Monte-Carlo experiment");
  add_common(bench, o);
  bench->add_option("--preset", o.preset, "fig2 | fig3 | fig4 | fig5 | fig6 (without --config)");

  auto* lb = app.add_subcommand("lowerbound", "relaxation lower bound for one scenario");
  add_common(lb, o);
  lb->add_option("--scenario", o.scenario, "scenario JSON");

  auto* ln = app.add_subcommand("largen", "large-N closed-form design");
  add_common(ln, o);
  ln->add_option("--scenario", o.scenario, "scenario JSON");

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) return cmd_gen(o);
    if (solve->parsed()) return cmd_solve(o);
    if (bench->parsed()) return cmd_bench(o);
    if (lb->parsed()) return cmd_lowerbound(o);
    if (ln->parsed()) return cmd_largen(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
