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

namespace twr {

struct BaselineResult {
  DesignSolution solution;
  SolveReport report;
};

/// Best design for fixed receive beamformers w: minimal uplink powers, then
/// the downlink program with V_k restricted to bases[k] (empty: span{g}).
BaselineResult fixed_receive_design(const Scenario& s, const DerivedCoefficients& c,
                                    const std::vector<CVec>& w,
                                    const std::vector<CMat>& bases = {});

/// Pairwise zero-forcing receive beamformers, transmit side optimized.
/// Requires N >= 2K - 1.
BaselineResult zf_receive_baseline(const Scenario& s, const DerivedCoefficients& c);

/// Per pair, an orthonormal basis of the projections of g_1k, g_2k onto the
/// null space of all other pairs' downlink channels. Requires N >= 2K - 1.
std::vector<CMat> zf_transmit_bases(const Scenario& s);

/// Zero forcing on both sides.
BaselineResult zf_transmit_receive_baseline(const Scenario& s, const DerivedCoefficients& c);

}  // namespace twr
