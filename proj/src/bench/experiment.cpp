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

#include "twr/bench/baselines.hpp"
#include "twr/bound/bound.hpp"
#include "twr/init/initializer.hpp"
#include "twr/multipair/multipair.hpp"
#include "twr/onepair/onepair.hpp"
#include "twr/verify/verifier.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace twr {

namespace {

const std::vector<std::string> kSolvers = {"onepair",    "fixed-beta",          "dc-cpfree",
                                           "dc-zf",      "zf-receive",          "zf-transmit-receive",
                                           "lower-bound", "large-n"};

// Expected ordering of objectives on a common scenario.
const std::vector<std::string> kChain = {"lower-bound", "dc-cpfree", "zf-receive",
                                         "zf-transmit-receive"};

Sweep sweep_from(const std::string& s) {
  if (s == "rate") return Sweep::rate;
  if (s == "noise") return Sweep::noise;
  if (s == "none") return Sweep::none;
  throw std::invalid_argument("unknown sweep variable: " + s);
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void fill_design(ResultRow& r, const Scenario& s, const DesignSolution& d, const SolveReport& rep,
                 double tol) {
  r.status = rep.status;
  r.iterations = rep.iterations;
  r.message = rep.message;
  if (rep.status != SolveStatus::optimal && rep.status != SolveStatus::max_iterations) return;
  r.objective_W = d.objective;
  const auto fr = check_p1(s, d, tol);
  r.verified = fr.pass;
  r.max_residual = fr.max_residual();
  if (!fr.pass) r.message += (r.message.empty() ? "" : "; ") + ("verifier: " + fr.worst);
}

void add_trace(std::vector<TraceRow>* trace, const std::string& solver, std::uint64_t seed,
               const SolveReport& rep) {
  if (!trace) return;
  for (size_t n = 0; n < rep.objective_trace.size(); ++n)
    trace->push_back({seed, 0.0, solver, static_cast<int>(n + 1), rep.objective_trace[n]});
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace

bool ResultRow::counted() const {
  return verified && (status == SolveStatus::optimal || status == SolveStatus::max_iterations);
}

bool ExperimentResult::all_verified() const {
  for (const auto& r : rows) {
    if (r.status == SolveStatus::infeasible) continue;
    if (!r.verified) return false;
  }
  return true;
}

void ExperimentConfig::validate() const {
  if (K < 1 || N < 1) throw std::invalid_argument("config: K and N must be positive");
  if (runs < 1) throw std::invalid_argument("config: runs must be >= 1");
  if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  if (dc_max_iter < 1) throw std::invalid_argument("config: dc_max_iter must be >= 1");
  if (sweep != Sweep::none && values.empty())
    throw std::invalid_argument("config: sweep range is empty");
  if (solvers.empty()) throw std::invalid_argument("config: no solvers requested");
  for (const auto& name : solvers) {
    if (std::find(kSolvers.begin(), kSolvers.end(), name) == kSolvers.end())
      throw std::invalid_argument("config: unknown solver " + name);
    if ((name == "onepair" || name == "fixed-beta") && K != 1)
      throw std::invalid_argument("config: " + name + " needs K = 1");
    if ((name == "dc-zf" || name.starts_with("zf-")) && N < 2 * K - 1)
      throw std::invalid_argument("config: " + name + " needs N >= 2K - 1");
    if (name == "large-n" && N < 2 * K)
      throw std::invalid_argument("config: large-n needs N >= 2K");
  }
  if (sweep == Sweep::rate)
    for (double v : values)
      if (!(v > 0.0)) throw std::invalid_argument("config: rate targets must be positive");
}

ExperimentConfig ExperimentConfig::preset(const std::string& id) {
  ExperimentConfig c;
  c.experiment = id;
  if (id == "fig2") {
    c.K = 1;
    c.N = 8;
    c.sweep = Sweep::rate;
    c.values = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    c.solvers = {"onepair", "fixed-beta", "dc-cpfree", "lower-bound"};
  } else if (id == "fig3") {
    c.solvers = {"dc-cpfree", "dc-zf", "lower-bound"};
    c.trace = true;
  } else if (id == "fig4") {
    c.sweep = Sweep::rate;
    c.values = {0.5, 1.0, 1.5, 2.0};
    c.solvers = {"lower-bound", "dc-cpfree", "zf-receive", "zf-transmit-receive"};
  } else if (id == "fig5") {
    c.sweep = Sweep::noise;
    c.values = {-80.0, -75.0, -70.0, -65.0, -60.0};
    c.solvers = {"lower-bound", "dc-cpfree", "zf-receive", "zf-transmit-receive"};
  } else if (id == "fig6") {
    c.K = 5;
    c.N = 8;
    c.sweep = Sweep::noise;
    c.values = {-70.0, -65.0, -60.0};
    c.solvers = {"lower-bound", "dc-cpfree"};
  } else if (id != "custom") {
    throw std::invalid_argument("unknown experiment preset: " + id);
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ExperimentConfig c = preset(j.value("experiment", std::string("custom")));
  c.K = j.value("K", c.K);
  c.N = j.value("N", c.N);
  if (j.contains("sweep")) c.sweep = sweep_from(j.at("sweep").get<std::string>());
  if (j.contains("values")) c.values = j.at("values").get<std::vector<double>>();
  c.runs = j.value("runs", c.runs);
  c.seed = j.value("seed", c.seed);
  if (j.contains("solvers")) c.solvers = j.at("solvers").get<std::vector<std::string>>();
  c.out = j.value("out", c.out);
  c.workers = j.value("workers", c.workers);
  c.dc_max_iter = j.value("dc_max_iter", c.dc_max_iter);
  c.verify_tol = j.value("verify_tol", c.verify_tol);
  c.trace = j.value("trace", c.trace);
  if (j.contains("params")) {
    const auto& p = j.at("params");
    auto& q = c.params;
    q.d_min = p.value("d_min", q.d_min);
    q.d_max = p.value("d_max", q.d_max);
    q.rho0 = p.value("rho0", q.rho0);
    q.pathloss_exp = p.value("pathloss_exp", q.pathloss_exp);
    q.eta = p.value("eta", q.eta);
    q.noise_dbm = p.value("noise_dbm", q.noise_dbm);
    q.p_c_dbm = p.value("p_c_dbm", q.p_c_dbm);
    q.E_min_dbm = p.value("E_min_dbm", q.E_min_dbm);
    q.E_max_dbm = p.value("E_max_dbm", q.E_max_dbm);
    q.rate_min = p.value("rate_min", q.rate_min);
    q.rate_max = p.value("rate_max", q.rate_max);
    q.fixed_rate = p.value("fixed_rate", q.fixed_rate);
  }
  return c;
}

ResultRow run_solver(const std::string& solver, const Scenario& s, const ExperimentConfig& cfg,
                     std::vector<TraceRow>* trace) {
  const auto t0 = std::chrono::steady_clock::now();
  ResultRow r;
  r.solver = solver;
  const auto c = derive_coefficients(s);
  if (solver == "onepair" || solver == "fixed-beta") {
    OnePairOptions o;
    if (solver == "fixed-beta") o.fixed_beta = 0.5;
    const auto res = solve_onepair(s, o);
    fill_design(r, s, res.solution, res.report, cfg.verify_tol);
  } else if (solver == "dc-cpfree" || solver == "dc-zf") {
    const InitPoint init = solver == "dc-cpfree" ? cp_free_initialize(s, c) : zf_initialize(s, c);
    DcOptions o;
    o.max_iter = cfg.dc_max_iter;
    const auto res = dc_solve(s, c, init, o);
    fill_design(r, s, res.solution, res.report, cfg.verify_tol);
    add_trace(trace, solver, 0, res.report);
  } else if (solver == "zf-receive" || solver == "zf-transmit-receive") {
    const auto res = solver == "zf-receive" ? zf_receive_baseline(s, c)
                                            : zf_transmit_receive_baseline(s, c);
    fill_design(r, s, res.solution, res.report, cfg.verify_tol);
  } else if (solver == "lower-bound") {
    const auto lb = lower_bound(s, c);
    r.status = lb.status;
    r.iterations = lb.uplink.iterations;
    if (lb.status == SolveStatus::optimal) {
      r.objective_W = lb.value;
      // a bound is usable once the relaxed uplink has converged
      r.verified = lb.uplink.converged;
      if (!r.verified) r.message = "uplink fixed point did not converge";
      if (trace) trace->push_back({0, 0.0, solver, 0, lb.value});
    }
  } else if (solver == "large-n") {
    const auto m = LargeScaleModel::from(s);
    const auto sol = large_n_solution(m);
    r.status = SolveStatus::optimal;
    r.objective_W = sol.total();
    const auto fr = check_orthogonal_per_user(orthogonal_scenario(m), sol.q, sol.p, sol.beta,
                                              cfg.verify_tol);
    r.verified = fr.pass;
    r.max_residual = fr.max_residual();
  } else {
    throw std::invalid_argument("unknown solver: " + solver);
  }
  if (r.objective_W > 0.0) r.objective_dBm = dbm_from_linear(r.objective_W);
  r.wall_ms = elapsed_ms(t0);
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<double> points = cfg.sweep == Sweep::none ? std::vector<double>{0.0} : cfg.values;
  const int P = static_cast<int>(points.size());
  const int tasks = P * cfg.runs;

  struct Slot {
    std::vector<ResultRow> rows;
    std::vector<TraceRow> traces;
  };
  std::vector<Slot> slots(static_cast<size_t>(tasks));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int t = next++; t < tasks; t = next++) {
      const int pi = t / cfg.runs, run = t % cfg.runs;
      ScenarioParams prm = cfg.params;
      if (cfg.sweep == Sweep::rate) prm.fixed_rate = points[pi];
      if (cfg.sweep == Sweep::noise) prm.noise_dbm = points[pi];
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(run);
      const Scenario s = generate_scenario(seed, cfg.N, cfg.K, prm);
      Slot& slot = slots[static_cast<size_t>(t)];
      for (const auto& name : cfg.solvers) {
        std::vector<TraceRow> tr;
        ResultRow r = run_solver(name, s, cfg, cfg.trace ? &tr : nullptr);
        r.experiment = cfg.experiment;
        r.seed = seed;
        r.sweep_value = points[pi];
        for (auto& row : tr) {
          row.seed = seed;
          row.sweep_value = points[pi];
          slot.traces.push_back(row);
        }
        slot.rows.push_back(std::move(r));
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < std::min(cfg.workers, tasks); ++w) pool.emplace_back(work);
    work();
  }

  ExperimentResult res;
  for (auto& slot : slots) {
    for (auto& r : slot.rows) res.rows.push_back(std::move(r));
    for (auto& t : slot.traces) res.traces.push_back(std::move(t));
  }

  for (int pi = 0; pi < P; ++pi)
    for (const auto& name : cfg.solvers) {
      PointSummary ps;
      ps.sweep_value = points[pi];
      ps.solver = name;
      double sum = 0.0, sum_db = 0.0;
      for (const auto& r : res.rows) {
        if (r.sweep_value != points[pi] || r.solver != name) continue;
        ++ps.runs;
        if (!r.counted()) continue;
        ++ps.counted;
        sum += r.objective_W;
        sum_db += r.objective_dBm;
      }
      ps.feasibility_rate = ps.runs ? static_cast<double>(ps.counted) / ps.runs : 0.0;
      if (ps.counted) {
        ps.mean_W = sum / ps.counted;
        ps.mean_dBm = dbm_from_linear(ps.mean_W);
        ps.mean_of_dBm = sum_db / ps.counted;
      } else {
        ps.mean_W = ps.mean_dBm = ps.mean_of_dBm = std::nan("");
      }
      res.summary.push_back(ps);
    }

  // ordering along the chain, between consecutive solvers present on a scenario
  for (size_t t = 0; t < slots.size(); ++t) {
    std::vector<const ResultRow*> chain;
    for (const auto& name : kChain)
      for (const auto& r : res.rows)
        if (r.solver == name && r.counted() && r.seed == cfg.seed + t % cfg.runs &&
            r.sweep_value == points[t / cfg.runs])
          chain.push_back(&r);
    for (size_t a = 0; a + 1 < chain.size(); ++a) {
      ++res.ordering_checks;
      const auto& lo = *chain[a];
      const auto& hi = *chain[a + 1];
      if (lo.objective_W > hi.objective_W * (1.0 + 1e-6))
        res.ordering_violations.push_back(
            {lo.seed, lo.sweep_value, lo.solver, hi.solver, lo.objective_W, hi.objective_W});
    }
  }

  if (!cfg.out.empty()) {
    const std::filesystem::path out(cfg.out);
    auto sibling = [&](const std::string& suffix) {
      return out.parent_path() / (out.stem().string() + suffix);
    };
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + cfg.out);
    write_rows_csv(f, res.rows);
    std::ofstream fs(sibling(".summary.csv"));
    write_summary_csv(fs, res.summary);
    if (cfg.trace) {
      std::ofstream ft(sibling(".trace.csv"));
      write_trace_csv(ft, res.traces);
    }
  }
  return res;
}

void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "# schema=1\n"
     << "experiment,seed,sweep_value,solver,objective_W,objective_dBm,iterations,status,"
        "verified,max_residual,message,wall_ms\n"
     << std::setprecision(17);
  for (const auto& r : rows)
    os << r.experiment << ',' << r.seed << ',' << r.sweep_value << ',' << r.solver << ','
       << r.objective_W << ',' << r.objective_dBm << ',' << r.iterations << ','
       << to_string(r.status) << ',' << (r.verified ? 1 : 0) << ',' << r.max_residual << ','
       << csv_escape(r.message) << ',' << std::setprecision(6) << r.wall_ms
       << std::setprecision(17) << '\n';
}

void write_summary_csv(std::ostream& os, const std::vector<PointSummary>& summary) {
  os << "# schema=1\n"
     << "sweep_value,solver,runs,counted,feasibility_rate,mean_W,mean_dBm,mean_of_dBm\n"
     << std::setprecision(17);
  for (const auto& p : summary)
    os << p.sweep_value << ',' << p.solver << ',' << p.runs << ',' << p.counted << ','
       << p.feasibility_rate << ',' << p.mean_W << ',' << p.mean_dBm << ',' << p.mean_of_dBm
       << '\n';
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& traces) {
  os << "# schema=1\n"
     << "seed,sweep_value,solver,n,objective_W,objective_dBm\n"
     << std::setprecision(17);
  for (const auto& t : traces)
    os << t.seed << ',' << t.sweep_value << ',' << t.solver << ',' << t.n << ','
       << t.objective_W << ',' << dbm_from_linear(t.objective_W) << '\n';
}

}  // namespace twr
