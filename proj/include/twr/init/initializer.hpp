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
#include <optional>

namespace twr {

struct InitPoint {
  std::vector<CVec> w0;
  UserMap<double> xi0;
  UserMap<double> mu0;
  bool feasible = false;
  double ratio = 0.0;                  // achieved max-min ratio
  std::vector<double> ratio_trace;     // after every w- and xi-update
  int alternations = 0;
  int restarts = 0;
};

/// Weight a in [0,1] maximizing min(sqrt(a)|e1|, sqrt(a)|e2^H e1|/|e1| + sqrt(1-a)|e_b|),
/// chosen among the closed-form candidates.
struct CombiningWeight {
  double a = 1.0;
  double value = 0.0;
  CVec u;  // unit vector in span{e1, e2}
};
CombiningWeight best_combining_weight(const CVec& e1, const CVec& e2);

/// Objective of the max-min ratio problem: min over users of
/// |w_k^H h_ik|^2 / xi_ik / (alpha_ik (sum_{j, l != k} |w_k^H h_jl|^2 / xi_jl + sigma_r^2)).
double min_ratio(const Scenario& s, const DerivedCoefficients& c, const std::vector<CVec>& w,
                 const UserMap<double>& xi);

/// Per-pair receive beamformers maximizing the ratio for fixed xi.
std::vector<CVec> maxmin_w_update(const Scenario& s, const DerivedCoefficients& c,
                                  const UserMap<double>& xi);

struct XiUpdate {
  UserMap<double> xi;
  double ratio = 0.0;  // balanced ratio, 1 / dominant eigenvalue
};

/// Power update maximizing the ratio under sum 1/xi <= P for fixed w.
/// Throws std::invalid_argument when some |w_k^H h_ik| is zero.
XiUpdate xi_update(const Scenario& s, const DerivedCoefficients& c, const std::vector<CVec>& w,
                   double P);

/// 1/xi meeting every ratio with equality: sigma_r^2 (I - D R^T)^{-1} D 1.
/// nullopt when the solution is not positive.
std::optional<UserMap<double>> activated_powers(const Scenario& s, const DerivedCoefficients& c,
                                                const std::vector<CVec>& w);

double default_power_budget(const Scenario& s, const DerivedCoefficients& c);

struct CpFreeOptions {
  double P = 0.0;  // <= 0 selects default_power_budget
  int max_alt = 30;
  int restarts = 5;
  std::uint64_t seed = 1;
};

InitPoint cp_free_initialize(const Scenario& s, const DerivedCoefficients& c,
                             const CpFreeOptions& opts = {});

/// Pairwise zero-forcing receive beamformers. Requires N >= 2K - 1.
InitPoint zf_initialize(const Scenario& s, const DerivedCoefficients& c);

/// mu = sqrt((1/xi + 2 p_c - 2 E)^+)
UserMap<double> mu_from_xi(const Scenario& s, const UserMap<double>& xi);

}  // namespace twr
