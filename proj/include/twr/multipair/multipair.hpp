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

#include "twr/conic/problem.hpp"
#include "twr/conic/solver.hpp"
#include "twr/init/initializer.hpp"

#include <iosfwd>
#include <stdexcept>

namespace twr {

/// -|w^H h|^2 / xi
double phi(const CVec& w, double xi, const CVec& h);

/// Affine majorant of phi around (wn, xin).
double phi_tilde(const CVec& w, double xi, const CVec& wn, double xin, const CVec& h);

struct DcState {
  int n = 0;
  std::vector<CVec> w;
  UserMap<double> xi;
  UserMap<double> mu;
  double objective = 0.0;  // watts, +inf before the first solve
  bool converged = false;
};

/// Convexified program around an expansion point together with the handles
/// needed to read its solution. Powers are measured in units of sigma_r^2;
/// V_k = B Vt_k B^H with B an orthonormal basis of span{g}.
struct P2RProgram {
  conic::ConicProblem problem;
  double unit = 1.0;
  CMat basis;
  std::vector<conic::HermVar> V;
  std::vector<conic::CVecVar> w;
  UserMap<conic::Var> xi, t, beta, mu;
};

/// Magnitudes used to balance the two 2x2 splitting blocks of one user before
/// they reach the solver. Each block is congruence-scaled by diag(1/sqrt(f), sqrt(f)).
struct SplitScale {
  double beta = 0.5;     // expected splitting ratio
  double down = 1.0;     // f for the downlink block
  double harvest = 1.0;  // f for the harvest block
};
SplitScale split_scale(const Scenario& s, double theta, double mu);

P2RProgram build_p2r(const Scenario& s, const DerivedCoefficients& c, const DcState& state);

/// Orthonormal basis of span{g_{i,k}} (N x r, r <= min(N, 2K)).
CMat downlink_basis(const Scenario& s);

class RankViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rank-one or rank-two factorization of a PSD covariance. Throws RankViolation
/// when the third eigenvalue exceeds rank_tol times the first.
RecoveredBeamformer recover(const CMat& V, double rank_tol = 1e-6);

/// 2x2 Alamouti blocks [[s1, s2], [-conj(s2), conj(s1)]] over consecutive symbol pairs.
std::vector<CMat> alamouti_blocks(const CVec& symbols);

struct DcOptions {
  int max_iter = 50;
  double rel_tol = 1e-5;
  double rank_tol = 1e-6;
  /// Replace q = 1/xi by the smallest powers meeting the uplink targets for the final w.
  bool reactivate_q = true;
  conic::SolverOptions solver;
};

struct DcResult {
  DesignSolution solution;
  SolveReport report;
  std::vector<DcState> states;
};

DcResult dc_solve(const Scenario& s, const DerivedCoefficients& c, const InitPoint& init,
                  const DcOptions& opts = {});

/// Columns: n, objective_W, objective_dBm, max_residual.
void write_dc_trace_csv(std::ostream& os, const SolveReport& report);

/// Largest harvest-feasible splitting ratios and the matching mu for fixed V, q.
/// When the downlink needs a larger ratio than harvesting allows, the endpoint
/// with the smaller violation is taken, or the harvest one if harvest_first.
void settle_splitting(const Scenario& s, const DerivedCoefficients& c, DesignSolution& sol,
                      bool harvest_first = false);

/// Scales each V_k by the smallest factor >= 1 that meets every downlink
/// target exactly at the current beta. Leaves sol untouched and returns false
/// if that needs more than 1% extra power.
bool repair_downlink(const Scenario& s, const DerivedCoefficients& c, DesignSolution& sol);

/// settle_splitting and repair_downlink combined: meet harvesting exactly,
/// then scale V_k up to meet the downlink targets.
void polish_splitting(const Scenario& s, const DerivedCoefficients& c, DesignSolution& sol);

}  // namespace twr
