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

namespace twr::conic {

inline constexpr double kFeasTol = 1e-7;
inline constexpr double kGapTol = 1e-8;

struct SolverOptions {
  double feas_tol = kFeasTol;
  double gap_tol = kGapTol;
  int max_iterations = 100;
  bool verbose = false;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  RVec x;                  // variable values in the caller's units
  double objective = 0.0;  // caller's units
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
  /// Residuals and gap within 100x of the tolerances. Set for every status;
  /// callers may accept such points when the solver stalls short of `optimal`.
  bool near_optimal = false;

  double value(Var v) const { return x[v.index]; }
  double value(const Affine& e) const { return e.evaluate(x); }
  CVec value(const CVecVar& v) const { return v.value(x); }
  CMat value(const HermVar& v) const { return v.value(x); }
};

/// Homogeneous self-dual interior-point method over the product of the
/// nonnegative orthant and real symmetric PSD cones.
ConicSolution solve(const ConicProblem& p, const SolverOptions& opts = {});

/// Real embedding [[Re, -Im], [Im, Re]] of a complex matrix.
RMat real_embedding(const CMat& M);

}  // namespace twr::conic
