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

#pragma once

#include "twr/core/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace twr {

enum class Sweep { none, rate, noise };

/// Known solver names: onepair, fixed-beta, dc-cpfree, dc-zf, zf-receive,
/// zf-transmit-receive, lower-bound, large-n.
struct ExperimentConfig {
  std::string experiment = "custom";
  int K = 3;
  int N = 12;
  Sweep sweep = Sweep::none;
  std::vector<double> values;  // common rate R [bps/Hz] or noise power [dBm]
  int runs = 20;
  std::uint64_t seed = 1;
  std::vector<std::string> solvers;
  std::string out;
  int workers = 1;
  int dc_max_iter = 50;
  double verify_tol = 1e-6;
  bool trace = false;  // also emit per-iteration DC objectives
  ScenarioParams params;

  /// Throws std::invalid_argument.
  void validate() const;

  /// fig2 .. fig6, or custom (empty solver set).
  static ExperimentConfig preset(const std::string& id);
  /// Keys override the preset named by "experiment" (default custom).
  static ExperimentConfig from_json(const std::string& text);
};

struct ResultRow {
  std::string experiment;
  std::uint64_t seed = 0;
  double sweep_value = 0.0;
  std::string solver;
  double objective_W = 0.0;
  double objective_dBm = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::numerical_failure;
  bool verified = false;
  double max_residual = 0.0;
  double wall_ms = 0.0;
  std::string message;

  /// Has a design (or bound) that counts toward the means.
  bool counted() const;
};

struct TraceRow {
  std::uint64_t seed = 0;
  double sweep_value = 0.0;
  std::string solver;
  int n = 0;
  double objective_W = 0.0;
};

/// Aggregate per sweep point and solver over counted rows.
struct PointSummary {
  double sweep_value = 0.0;
  std::string solver;
  int runs = 0;
  int counted = 0;
  double feasibility_rate = 0.0;
  double mean_W = 0.0;
  double mean_dBm = 0.0;     // dBm of the mean in watts
  double mean_of_dBm = 0.0;  // mean of per-run dBm values
};

struct OrderingViolation {
  std::uint64_t seed = 0;
  double sweep_value = 0.0;
  std::string lower, upper;
  double lower_W = 0.0, upper_W = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<TraceRow> traces;
  std::vector<PointSummary> summary;
  int ordering_checks = 0;
  std::vector<OrderingViolation> ordering_violations;

  /// No row with a design failed verification or broke down numerically.
  bool all_verified() const;
};

/// Runs every solver on every (sweep point, run). Scenario seeds are seed + run,
/// shared across sweep points. Writes <out>, <out stem>.summary.csv and, with
/// trace set, <out stem>.trace.csv when out is non-empty.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_summary_csv(std::ostream& os, const std::vector<PointSummary>& summary);
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& traces);

/// Runs one named solver on a scenario and verifies the outcome.
ResultRow run_solver(const std::string& solver, const Scenario& s, const ExperimentConfig& cfg,
                     std::vector<TraceRow>* trace = nullptr);

}  // namespace twr
