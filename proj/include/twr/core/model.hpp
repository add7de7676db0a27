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

#include "twr/core/types.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace twr {

double linear_from_dbm(double dbm);
double dbm_from_linear(double watts);

DerivedCoefficients derive_coefficients(const Scenario& s);

/// 2^{2 Rbar}
inline double rate_power(double rbar) { return std::exp2(2.0 * rbar); }

/// q is indexed per user, w per pair. ||w_k|| = 1 is assumed, not checked.
double uplink_sinr(const Scenario& s, const UserMap<double>& q, const std::vector<CVec>& w,
                   int i, int k);
double uplink_rate(const Scenario& s, const UserMap<double>& q, const std::vector<CVec>& w,
                   int i, int k);

struct DownlinkEval {
  double sinr = 0.0;
  double rate = 0.0;
};

/// Downlink SINR/rate of user (i, k) under transmit covariances V (Tr(Theta V) form).
DownlinkEval downlink_sinr_rate(const Scenario& s, const std::vector<CMat>& V,
                                const UserMap<double>& beta, int i, int k);

/// Same quantity from rank-one beamformers: V_l = p_l v_l v_l^H.
DownlinkEval downlink_sinr_rate(const Scenario& s, const std::vector<double>& p,
                                const std::vector<CVec>& v, const UserMap<double>& beta, int i,
                                int k);

double harvested_power(const Scenario& s, const std::vector<CMat>& V,
                       const UserMap<double>& beta, int i, int k);

/// Received downlink power at user (i, k), sum_l Tr(Theta_{i,k} V_l) + sigma_u^2.
double received_power(const Scenario& s, const std::vector<CMat>& V, int i, int k);

struct ScenarioParams {
  double d_min = 1.0;           // m
  double d_max = 10.0;          // m
  double rho0 = 1e-3;           // pathloss at 1 m
  double pathloss_exp = 2.7;
  double eta = 0.8;
  double noise_dbm = -60.0;
  double p_c_dbm = 10.0;
  double E_min_dbm = 9.5;
  double E_max_dbm = 13.0;
  double rate_min = kRateMin;
  double rate_max = 2.0;
  /// When positive, every rate target is set to this value instead of drawn.
  double fixed_rate = 0.0;
};

Scenario generate_scenario(std::uint64_t seed, int N, int K, const ScenarioParams& params = {});

double pathloss(double distance_m, const ScenarioParams& params = {});

std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);

}  // namespace twr
