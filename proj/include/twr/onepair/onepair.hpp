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

#include <optional>

namespace twr {

struct BeamDirection {
  CVec w;
  bool degenerate = false;  // h1, h2 collinear; w = h1/||h1|| for every gamma
};

BeamDirection w_of_gamma(double gamma, const CVec& h1, const CVec& h2);

struct GammaPoint {
  double gamma = 0.0;
  CVec w;
  CMat A;     // 2x2 in the basis G
  CMat G;     // N x 2 orthonormal basis of span{g1, g2}
  double beta[2] = {1.0, 1.0};
  double mu[2] = {0.0, 0.0};
  double q[2] = {0.0, 0.0};
  double objective = 0.0;  // Tr(A) + q1 + q2, watts
};

struct OnePairOptions {
  /// When set, both splitting ratios are pinned to this value (baseline mode).
  std::optional<double> fixed_beta;
  int grid_points = 101;
  double gamma_tol = 1e-4;
};

/// Orthonormal N x 2 basis of span{g1, g2}; an arbitrary orthonormal second
/// column is used when the channels are collinear.
CMat span_basis(const CVec& g1, const CVec& g2);

/// SDR of the reduced one-pair problem at fixed gamma. Returns nullopt when the
/// program is infeasible (e.g. w(gamma) orthogonal to one uplink channel).
std::optional<GammaPoint> solve_p4_fixed_gamma(const Scenario& s, const DerivedCoefficients& c,
                                               double gamma, const OnePairOptions& opts = {});

/// Rank-one matrix with the same trace against every C (and the same trace)
/// as A. Returns nullopt if no such point is found.
std::optional<CMat> rank_one_extract(const CMat& A, const std::vector<CMat>& constraints);

struct OnePairResult {
  DesignSolution solution;
  SolveReport report;
  GammaPoint best;
  std::vector<std::pair<double, double>> evaluated;  // (gamma, objective), inf if infeasible
  bool degenerate = false;
};

OnePairResult solve_onepair(const Scenario& s, const OnePairOptions& opts = {});

}  // namespace twr
