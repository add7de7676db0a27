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

#include "twr/bench/baselines.hpp"

#include "twr/bound/bound.hpp"
#include "twr/init/initializer.hpp"
#include "twr/multipair/multipair.hpp"

#include <chrono>
#include <stdexcept>

namespace twr {

BaselineResult fixed_receive_design(const Scenario& s, const DerivedCoefficients& c,
                                    const std::vector<CVec>& w, const std::vector<CMat>& bases) {
  const auto t0 = std::chrono::steady_clock::now();
  BaselineResult out;
  auto& rep = out.report;
  auto finish = [&](SolveStatus st) {
    rep.status = st;
    rep.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
  };
  const auto q = activated_powers(s, c, w);
  if (!q) {
    rep.message = "uplink targets not reachable with these receivers";
    return finish(SolveStatus::infeasible);
  }
  // with q fixed the harvest requirement is a constant
  UserMap<double> mu(s.K);
  for (int x = 0; x < 2 * s.K; ++x)
    mu[x] = std::sqrt(std::max(0.0, (*q)[x] + 2.0 * s.p_c - 2.0 * s.E[x]));
  const auto dl = solve_downlink_power(s, c, mu, bases);
  rep.iterations = 1;
  if (dl.status != SolveStatus::optimal) {
    rep.message = "downlink program: " + to_string(dl.status);
    return finish(dl.status);
  }
  DesignSolution& d = out.solution;
  d.w = w;
  d.V = dl.V;
  d.q = *q;
  polish_splitting(s, c, d);
  d.objective = d.relay_power() + d.user_power();
  rep.objective_trace.push_back(d.objective);
  try {
    for (const auto& V : d.V) d.recovered.push_back(recover(V));
  } catch (const RankViolation& e) {
    d.recovered.clear();
    rep.message = e.what();
  }
  return finish(SolveStatus::optimal);
}

BaselineResult zf_receive_baseline(const Scenario& s, const DerivedCoefficients& c) {
  return fixed_receive_design(s, c, zf_initialize(s, c).w0);
}

std::vector<CMat> zf_transmit_bases(const Scenario& s) {
  if (s.N < 2 * s.K - 1) throw std::invalid_argument("zf_transmit_bases: needs N >= 2K - 1");
  std::vector<CMat> out;
  for (int k = 0; k < s.K; ++k) {
    CMat others(s.N, 2 * (s.K - 1));
    int col = 0;
    for (int l = 0; l < s.K; ++l)
      if (l != k)
        for (int i = 0; i < 2; ++i) others.col(col++) = s.g(i, l);
    CMat null = CMat::Identity(s.N, s.N);
    if (col > 0) {
      Eigen::ColPivHouseholderQR<CMat> qr(others);
      const CMat Q = qr.householderQ() * CMat::Identity(s.N, s.N);
      null = Q.rightCols(s.N - qr.rank());
    }
    CMat own(null.cols(), 2);
    own.col(0) = null.adjoint() * s.g(0, k);
    own.col(1) = null.adjoint() * s.g(1, k);
    Eigen::ColPivHouseholderQR<CMat> qr(own);
    qr.setThreshold(1e-10);
    const int r = static_cast<int>(qr.rank());
    if (r == 0) throw std::invalid_argument("zf_transmit_bases: pair channel removed by projection");
    const CMat Q = qr.householderQ() * CMat::Identity(own.rows(), r);
    out.push_back(null * Q);
  }
  return out;
}

BaselineResult zf_transmit_receive_baseline(const Scenario& s, const DerivedCoefficients& c) {
  return fixed_receive_design(s, c, zf_initialize(s, c).w0, zf_transmit_bases(s));
}

}  // namespace twr
