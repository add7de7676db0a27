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


#include "twr/bound/bound.hpp"

#include "twr/multipair/multipair.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace twr {

std::pair<UserMap<double>, UserMap<CVec>> fixed_point_step(const Scenario& s,
                                                           const DerivedCoefficients& c,
                                                           const UserMap<double>& omega) {
  UserMap<double> next(s.K);
  UserMap<CVec> z(s.K);
  for (int k = 0; k < s.K; ++k) {
    CMat C = s.sigma_r2 * CMat::Identity(s.N, s.N);
    for (int l = 0; l < s.K; ++l) {
      if (l == k) continue;
      for (int j = 0; j < 2; ++j) C += omega(j, l) * s.h(j, l) * s.h(j, l).adjoint();
    }
    const Eigen::LLT<CMat> llt(C);
    for (int i = 0; i < 2; ++i) {
      z(i, k) = llt.solve(s.h(i, k)).normalized();
      double interf = 0.0;
      for (int l = 0; l < s.K; ++l) {
        if (l == k) continue;
        for (int j = 0; j < 2; ++j) interf += omega(j, l) * std::norm(z(i, k).dot(s.h(j, l)));
      }
      next(i, k) = c.alpha(i, k) * (interf + s.sigma_r2) / std::norm(z(i, k).dot(s.h(i, k)));
    }
  }
  return {next, z};
}

FixedPointState uplink_fixed_point(const Scenario& s, const DerivedCoefficients& c,
                                   const FixedPointOptions& opts) {
  FixedPointState st;
  st.omega = UserMap<double>(s.K, 0.0);
  st.trace.push_back(st.omega);
  for (int n = 0; n < opts.max_iter; ++n) {
    auto [next, z] = fixed_point_step(s, c, st.omega);
    double change = 0.0;
    bool small = true;
    for (int u = 0; u < 2 * s.K; ++u) {
      const double d = std::abs(next[u] - st.omega[u]);
      change = std::max(change, d);
      small = small && d <= opts.tol && d <= opts.tol * next[u];
      if (!(next[u] <= opts.cap)) st.feasible = false;
    }
    st.omega = next;
    st.z = z;
    st.iterations = n + 1;
    st.trace.push_back(st.omega);
    if (!st.feasible) return st;
    if (small) {
      st.converged = true;
      break;
    }
  }
  return st;
}

DownlinkDesign solve_downlink_power(const Scenario& s, const DerivedCoefficients& c,
                                    const UserMap<double>& mu, const std::vector<CMat>& bases,
                                    const conic::SolverOptions& opts) {
  using conic::Affine;
  const double u = s.sigma_r2;
  const int K = s.K;
  std::vector<CMat> B = bases;
  if (B.empty()) B.assign(K, downlink_basis(s));
  if (static_cast<int>(B.size()) != K)
    throw std::invalid_argument("solve_downlink_power: one basis per pair required");

  conic::ConicProblem p;
  std::vector<conic::HermVar> V;
  for (int k = 0; k < K; ++k) {
    double need = 0.0;
    for (int i = 0; i < 2; ++i)
      need = std::max(need, std::max(c.theta(i, k) * (s.sigma_u2 + s.sigma_z2),
                                     mu(i, k) * mu(i, k) / s.eta) /
                                s.g(i, k).squaredNorm());
    V.push_back(p.add_herm("V" + std::to_string(k), static_cast<int>(B[k].cols()), true,
                           std::max(need / u, 1.0)));
  }
  UserMap<conic::Var> beta(K);
  Affine objective;
  for (int k = 0; k < K; ++k) objective += V[k].trace();
  for (int x = 0; x < 2 * K; ++x)
    beta[x] = p.add_var("beta" + std::to_string(x), split_scale(s, c.theta[x], mu[x]).beta);
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < 2; ++i) {
      const int x = UserMap<double>::flat(i, k);
      Affine sig = -s.sigma_u2 / u, rx = s.sigma_u2 / u;
      for (int l = 0; l < K; ++l) {
        const CVec gt = B[l].adjoint() * s.g(i, k);
        const Affine tl = V[l].trace_with(gt * gt.adjoint());
        if (l == k) {
          sig += (1.0 / c.theta(i, k)) * tl;
        } else {
          sig -= tl;
        }
        rx += tl;
      }
      const SplitScale sc = split_scale(s, c.theta[x], mu[x]);
      p.schur_lmi((1.0 / sc.down) * sig, std::sqrt(s.sigma_z2 / u), sc.down * Affine(beta[x]),
                  "downlink" + std::to_string(x));
      p.schur_lmi((1.0 / sc.harvest) * rx, mu[x] / std::sqrt(u),
                  sc.harvest * s.eta * (1.0 - Affine(beta[x])), "harvest" + std::to_string(x));
      p.add_le(Affine(beta[x]) - 1.0, "beta_max" + std::to_string(x));
    }
  p.minimize(objective);
  const auto sol = conic::solve(p, opts);

  DownlinkDesign out;
  if (sol.status == SolveStatus::infeasible) {
    out.status = SolveStatus::infeasible;
    return out;
  }
  if (sol.status != SolveStatus::optimal && !sol.near_optimal) {
    out.status = sol.status;
    return out;
  }
  out.status = SolveStatus::optimal;
  out.beta = UserMap<double>(K);
  for (int k = 0; k < K; ++k) {
    CMat Vt = sol.value(V[k]);
    Vt = 0.5 * (Vt + Vt.adjoint());
    out.V.push_back(u * B[k] * Vt * B[k].adjoint());
    out.relay_power += out.V.back().trace().real();
  }
  for (int x = 0; x < 2 * K; ++x) out.beta[x] = std::clamp(sol.value(beta[x]), 0.0, 1.0);
  return out;
}

LowerBound lower_bound(const Scenario& s, const DerivedCoefficients& c,
                       const FixedPointOptions& opts) {
  LowerBound lb;
  lb.uplink = uplink_fixed_point(s, c, opts);
  if (!lb.uplink.feasible) {
    lb.status = SolveStatus::infeasible;
    return lb;
  }
  UserMap<double> mu(s.K);
  for (int x = 0; x < 2 * s.K; ++x)
    mu[x] = std::sqrt(std::max(0.0, lb.uplink.omega[x] + 2.0 * s.p_c - 2.0 * s.E[x]));
  lb.downlink = solve_downlink_power(s, c, mu);
  lb.status = lb.downlink.status;
  if (lb.status != SolveStatus::optimal) return lb;
  lb.relay_power = lb.downlink.relay_power;
  lb.value = lb.relay_power;
  for (double w : lb.uplink.omega) lb.value += w;
  return lb;
}

LargeScaleModel LargeScaleModel::from(const Scenario& s) {
  LargeScaleModel m;
  m.N = s.N;
  m.K = s.K;
  m.rho = s.rho;
  m.rate = s.rate;
  m.E = s.E;
  m.sigma_r2 = s.sigma_r2;
  m.sigma_u2 = s.sigma_u2;
  m.sigma_z2 = s.sigma_z2;
  m.eta = s.eta;
  m.p_c = s.p_c;
  return m;
}

double LargeNSolution::total() const {
  double t = 0.0;
  for (int x = 0; x < q.size(); ++x) t += q[x] + p[x];
  return t;
}

LargeNSolution large_n_solution(const LargeScaleModel& m) {
  LargeNSolution sol;
  sol.q = sol.p = sol.beta = sol.B = UserMap<double>(m.K);
  sol.regime = UserMap<int>(m.K);
  const double su = m.sigma_u2, sz = m.sigma_z2;
  for (int k = 0; k < m.K; ++k)
    for (int i = 0; i < 2; ++i) {
      const int x = UserMap<double>::flat(i, k);
      const double th_dn = rate_power(m.rate(1 - i, k)) - 1.0;
      const double th_up = rate_power(m.rate(i, k)) - 1.0;
      const double nr = m.N * m.rho[x];
      sol.q[x] = th_up * m.sigma_r2 / nr;
      const double need = sol.q[x] + 2.0 * m.p_c - 2.0 * m.E[x];
      const double B = th_dn * sz - (th_dn + 1.0) * su + need / m.eta;
      sol.B[x] = B;
      if (need <= 0.0) {
        sol.regime[x] = 1;
        sol.beta[x] = 1.0;
        sol.p[x] = th_dn / nr * (su + sz);
        continue;
      }
      sol.regime[x] = 2;
      const double cc = 4.0 * th_dn * (th_dn + 1.0) * su * sz;
      const double root = std::sqrt(B * B + cc);
      const double sum = B >= 0.0 ? B + root : cc / (root - B);  // B + root without cancellation
      sol.beta[x] = 2.0 * th_dn * sz / sum;
      sol.p[x] = th_dn / nr * (sum / (2.0 * th_dn) + su);
    }
  return sol;
}

Scenario orthogonal_scenario(const LargeScaleModel& m) {
  if (m.N < 2 * m.K) throw std::invalid_argument("orthogonal_scenario: requires N >= 2K");
  Scenario s;
  s.N = m.N;
  s.K = m.K;
  s.h = s.g = UserMap<CVec>(m.K);
  for (int x = 0; x < 2 * m.K; ++x) {
    s.h[x] = CVec::Zero(m.N);
    s.h[x][x] = std::sqrt(m.N * m.rho[x]);
    s.g[x] = s.h[x];
  }
  s.sigma_r2 = m.sigma_r2;
  s.sigma_u2 = m.sigma_u2;
  s.sigma_z2 = m.sigma_z2;
  s.eta = m.eta;
  s.p_c = m.p_c;
  s.E = m.E;
  s.rate = m.rate;
  s.rho = m.rho;
  return s;
}

}  // namespace twr
