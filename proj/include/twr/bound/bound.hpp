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

#include "twr/conic/solver.hpp"
#include "twr/core/model.hpp"

namespace twr {

struct FixedPointState {
  UserMap<double> omega;  // optimal uplink powers of the relaxed uplink problem
  UserMap<CVec> z;        // unit-norm virtual receivers
  int iterations = 0;
  bool converged = false;
  bool feasible = true;          // false once some omega exceeds the cap
  std::vector<UserMap<double>> trace;  // omega after every iteration, starting at 0
};

struct FixedPointOptions {
  double tol = 1e-12;  // absolute change in watts; also required relative to omega
  double cap = 1e6;    // watts
  int max_iter = 500;
};

FixedPointState uplink_fixed_point(const Scenario& s, const DerivedCoefficients& c,
                                   const FixedPointOptions& opts = {});

/// One application of the virtual-receiver update: returns (omega', z').
std::pair<UserMap<double>, UserMap<CVec>> fixed_point_step(const Scenario& s,
                                                           const DerivedCoefficients& c,
                                                           const UserMap<double>& omega);

/// Downlink part of a design with uplink already fixed: transmit covariances
/// and splitting ratios minimizing sum Tr(V) for constant harvest entries mu.
struct DownlinkDesign {
  SolveStatus status = SolveStatus::numerical_failure;
  std::vector<CMat> V;
  UserMap<double> beta;
  double relay_power = 0.0;  // program optimum, watts
};

/// `bases[k]` restricts V_k to B_k X B_k^H; empty means span{g} for every pair.
DownlinkDesign solve_downlink_power(const Scenario& s, const DerivedCoefficients& c,
                                    const UserMap<double>& mu,
                                    const std::vector<CMat>& bases = {},
                                    const conic::SolverOptions& opts = {});

struct LowerBound {
  SolveStatus status = SolveStatus::numerical_failure;
  double value = 0.0;  // watts; relay part + sum omega
  double relay_power = 0.0;
  FixedPointState uplink;
  DownlinkDesign downlink;
};

LowerBound lower_bound(const Scenario& s, const DerivedCoefficients& c,
                       const FixedPointOptions& opts = {});

/// Large-scale description used by the asymptotic analysis: no fast fading,
/// ||h_ik||^2 = ||g_ik||^2 = N rho_ik.
struct LargeScaleModel {
  int N = 0;
  int K = 0;
  UserMap<double> rho;
  UserMap<double> rate;
  UserMap<double> E;
  double sigma_r2 = 0.0;
  double sigma_u2 = 0.0;
  double sigma_z2 = 0.0;
  double eta = 0.0;
  double p_c = 0.0;

  static LargeScaleModel from(const Scenario& s);
};

struct LargeNSolution {
  UserMap<double> q, p, beta, B;
  UserMap<int> regime;  // 1: harvesting not needed, 2: harvesting active

  double total() const;
};

LargeNSolution large_n_solution(const LargeScaleModel& m);

/// Channels h_ik = g_ik = sqrt(N rho_ik) e_{2k+i}: mutually orthogonal, so the
/// asymptotic design is exact. Requires N >= 2K.
Scenario orthogonal_scenario(const LargeScaleModel& m);

}  // namespace twr
