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
#include <string>

namespace twr {

/// Worst normalized violation per constraint family; positive means violated.
struct FeasibilityReport {
  double uplink = 0.0;
  double downlink = 0.0;
  double harvest = 0.0;
  double norms = 0.0;
  double ranges = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::string worst;  // family name of the largest residual

  double max_residual() const;
  std::string to_json() const;
};

/// Checks every constraint of the original problem. Residuals are normalized by
/// the right-hand sides: uplink and downlink in 2^{2R} units, harvest by the
/// larger of q and the harvest budget.
FeasibilityReport check_p1(const Scenario& s, const DesignSolution& sol, double tol);

/// |q_ik |w^H h_ik|^2 / sum_j q_jk |w^H h_jk|^2 - 2^{2R_ik} / (2^{2R_1k} + 2^{2R_2k})|,
/// maximized over the two users of each pair.
std::vector<double> property1_residual(const Scenario& s, const DesignSolution& sol);

struct ProbeResult {
  bool pass = true;
  int trials = 0;
  int skipped = 0;           // perturbations that could not be made feasible
  double worst_drop = 0.0;   // largest relative objective decrease seen
};

/// Random perturbations of (w, V, beta), each repaired by re-activating the
/// uplink powers and rescaling all V_k by the smallest common factor that keeps
/// downlink and harvest constraints satisfied. Fails if any repaired point
/// beats the objective by more than step^2 (relative).
ProbeResult local_optimality_probe(const Scenario& s, const DesignSolution& sol, int n_trials,
                                   double step, std::uint64_t seed = 1);

/// Feasibility of per-user (no network coding) designs in a scenario whose
/// channels are mutually orthogonal: user (i, k) is served by matched filters
/// with uplink power q and downlink power p. Uplink target is 2^{2R_ik} - 1.
FeasibilityReport check_orthogonal_per_user(const Scenario& s, const UserMap<double>& q,
                                            const UserMap<double>& p,
                                            const UserMap<double>& beta, double tol);

}  // namespace twr
