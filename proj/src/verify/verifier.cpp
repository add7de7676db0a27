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


#include "twr/verify/verifier.hpp"

#include <Eigen/Eigenvalues>

#include <json.hpp>

#include <optional>
#include <random>

namespace twr {

double FeasibilityReport::max_residual() const {
  return std::max({uplink, downlink, harvest, norms, ranges});
}

std::string FeasibilityReport::to_json() const {
  nlohmann::json j;
  j["pass"] = pass;
  j["tol"] = tol;
  j["worst"] = worst;
  j["residuals"] = {{"uplink", uplink},
                    {"downlink", downlink},
                    {"harvest", harvest},
                    {"norms", norms},
                    {"ranges", ranges}};
  return j.dump();
}

namespace {

void finalize(FeasibilityReport& r, double tol) {
  r.tol = tol;
  const std::pair<const char*, double> fam[] = {{"uplink", r.uplink},
                                                {"downlink", r.downlink},
                                                {"harvest", r.harvest},
                                                {"norms", r.norms},
                                                {"ranges", r.ranges}};
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& [n, v] : fam)
    if (v > m) m = v, r.worst = n;
  r.pass = std::isfinite(m) && m <= tol;
}

double harvest_residual(const Scenario& s, const std::vector<CMat>& V, const UserMap<double>& q,
                        const UserMap<double>& beta, int i, int k) {
  const double budget = harvested_power(s, V, beta, i, k) + 2.0 * s.E(i, k) - 2.0 * s.p_c;
  const double scale = std::max({q(i, k), std::abs(budget), 1e-300});
  return (q(i, k) - budget) / scale;
}

double downlink_residual(const Scenario& s, double sinr, int i, int k) {
  const double need = rate_power(s.rate(1 - i, k));
  return (need - (1.0 + sinr)) / need;
}

}  // namespace

FeasibilityReport check_p1(const Scenario& s, const DesignSolution& sol, double tol) {
  FeasibilityReport r;
  r.uplink = r.downlink = r.harvest = r.norms = r.ranges = -std::numeric_limits<double>::infinity();
  const int K = s.K;
  if (static_cast<int>(sol.w.size()) != K || static_cast<int>(sol.V.size()) != K ||
      sol.q.pairs() != K || sol.beta.pairs() != K) {
    r.norms = std::numeric_limits<double>::infinity();
    finalize(r, tol);
    return r;
  }
  for (int k = 0; k < K; ++k) {
    r.norms = std::max(r.norms, std::abs(sol.w[k].norm() - 1.0));
    const CMat& V = sol.V[k];
    r.ranges = std::max(r.ranges, (V - V.adjoint()).norm() / std::max(V.norm(), 1e-300));
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (V + V.adjoint()), Eigen::EigenvaluesOnly);
    const double lmax = std::max(es.eigenvalues().maxCoeff(), 1e-300);
    r.ranges = std::max(r.ranges, -es.eigenvalues().minCoeff() / lmax);
    double pair_rx = 0.0;
    for (int j = 0; j < 2; ++j) pair_rx += sol.q(j, k) * std::norm(sol.w[k].dot(s.h(j, k)));
    for (int i = 0; i < 2; ++i) {
      const double q = sol.q(i, k), b = sol.beta(i, k);
      r.ranges = std::max({r.ranges, -q / std::max(std::abs(q), 1e-300), b - 1.0,
                           b > 0.0 ? -std::numeric_limits<double>::infinity() : 1.0});
      // uplink in its two-term form
      const double need = rate_power(s.rate(i, k));
      const double own = q * std::norm(sol.w[k].dot(s.h(i, k)));
      const double ratio = pair_rx > 0.0 ? own / pair_rx : 0.0;
      const double lhs = ratio + uplink_sinr(s, sol.q, sol.w, i, k);
      r.uplink = std::max(r.uplink, (need - lhs) / need);
      r.downlink = std::max(r.downlink,
                            downlink_residual(s, downlink_sinr_rate(s, sol.V, sol.beta, i, k).sinr, i, k));
      r.harvest = std::max(r.harvest, harvest_residual(s, sol.V, sol.q, sol.beta, i, k));
    }
  }
  finalize(r, tol);
  return r;
}

std::vector<double> property1_residual(const Scenario& s, const DesignSolution& sol) {
  std::vector<double> out(s.K, 0.0);
  for (int k = 0; k < s.K; ++k) {
    double rx[2];
    for (int j = 0; j < 2; ++j) rx[j] = sol.q(j, k) * std::norm(sol.w[k].dot(s.h(j, k)));
    const double t1 = rate_power(s.rate(0, k)), t2 = rate_power(s.rate(1, k));
    const double tot = rx[0] + rx[1];
    for (int i = 0; i < 2; ++i) {
      const double ratio = tot > 0.0 ? rx[i] / tot : 0.0;
      const double target = (i == 0 ? t1 : t2) / (t1 + t2);
      out[k] = std::max(out[k], std::abs(ratio - target));
    }
  }
  return out;
}

namespace {

/// Uplink powers meeting q_ik |w^H h_ik|^2 = alpha_ik (interference + sigma^2)
/// with equality; empty if the system has no positive solution.
std::optional<UserMap<double>> activate_uplink(const Scenario& s, const std::vector<CVec>& w) {
  const int K = s.K, U = 2 * K;
  RMat M = RMat::Identity(U, U);
  RVec rhs(U);
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < 2; ++i) {
      const double t1 = rate_power(s.rate(0, k)), t2 = rate_power(s.rate(1, k));
      const double ti = i == 0 ? t1 : t2;
      const double alpha = ti - ti / (t1 + t2);
      const int u = UserMap<double>::flat(i, k);
      const double d = alpha / std::norm(w[k].dot(s.h(i, k)));
      rhs[u] = s.sigma_r2 * d;
      for (int l = 0; l < K; ++l) {
        if (l == k) continue;
        for (int j = 0; j < 2; ++j)
          M(u, UserMap<double>::flat(j, l)) -= d * std::norm(w[k].dot(s.h(j, l)));
      }
    }
  const RVec q = M.partialPivLu().solve(rhs);
  if (!q.allFinite() || (q.array() <= 0.0).any()) return std::nullopt;
  UserMap<double> out(K);
  for (int u = 0; u < U; ++u) out[u] = q[u];
  return out;
}

/// Smallest c with all downlink and harvest constraints met by c * V.
double minimal_common_scale(const Scenario& s, const std::vector<CMat>& V,
                            const UserMap<double>& q, const UserMap<double>& beta) {
  double c = 0.0;
  for (int k = 0; k < s.K; ++k)
    for (int i = 0; i < 2; ++i) {
      const CVec& g = s.g(i, k);
      double sig = 0.0, interf = 0.0, rx = 0.0;
      for (int l = 0; l < s.K; ++l) {
        const double t = (g.adjoint() * V[l] * g)(0, 0).real();
        rx += t;
        (l == k ? sig : interf) += t;
      }
      const double theta = rate_power(s.rate(1 - i, k)) - 1.0;
      const double b = beta(i, k);
      const double margin = sig - theta * interf;
      if (!(margin > 0.0) || !(b > 0.0)) return std::numeric_limits<double>::infinity();
      c = std::max(c, theta * (s.sigma_u2 + s.sigma_z2 / b) / margin);
      const double need = q(i, k) + 2.0 * s.p_c - 2.0 * s.E(i, k);
      if (need > 0.0) {
        if (!(b < 1.0) || !(rx > 0.0)) return std::numeric_limits<double>::infinity();
        c = std::max(c, (need / (s.eta * (1.0 - b)) - s.sigma_u2) / rx);
      }
    }
  return c;
}

}  // namespace

ProbeResult local_optimality_probe(const Scenario& s, const DesignSolution& sol, int n_trials,
                                   double step, std::uint64_t seed) {
  ProbeResult res;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  const double obj0 = sol.relay_power() + sol.user_power();
  for (int t = 0; t < n_trials; ++t) {
    const int which = t % 3;  // 0: w, 1: V, 2: beta
    std::vector<CVec> w = sol.w;
    std::vector<CMat> V = sol.V;
    UserMap<double> beta = sol.beta;
    if (which == 0) {
      for (auto& wk : w) {
        CVec d(wk.size());
        for (int a = 0; a < d.size(); ++a) d[a] = cplx(n(rng), n(rng));
        wk = (wk + step * d.normalized()).normalized();
      }
    } else if (which == 1) {
      for (auto& Vk : V) {
        const auto N = Vk.rows();
        CMat B(N, N);
        for (int a = 0; a < N; ++a)
          for (int b = 0; b < N; ++b) B(a, b) = cplx(n(rng), n(rng));
        CMat H = B + B.adjoint();
        H /= H.norm();
        CMat P = Vk + step * Vk.trace().real() * H;
        Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (P + P.adjoint()));
        RVec ev = es.eigenvalues().cwiseMax(0.0);
        Vk = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
      }
    } else {
      for (auto& b : beta) b = std::clamp(b + step * n(rng), 1e-9, 1.0);
    }
    auto q = activate_uplink(s, w);
    if (!q) {
      ++res.skipped;
      continue;
    }
    const double c = minimal_common_scale(s, V, *q, beta);
    if (!std::isfinite(c)) {
      ++res.skipped;
      continue;
    }
    ++res.trials;
    double obj = 0.0;
    for (const auto& Vk : V) obj += c * Vk.trace().real();
    for (double x : *q) obj += x;
    const double drop = (obj0 - obj) / obj0;
    res.worst_drop = std::max(res.worst_drop, drop);
    if (drop > step * step) res.pass = false;
  }
  return res;
}

FeasibilityReport check_orthogonal_per_user(const Scenario& s, const UserMap<double>& q,
                                            const UserMap<double>& p,
                                            const UserMap<double>& beta, double tol) {
  FeasibilityReport r;
  r.uplink = r.downlink = r.harvest = r.norms = r.ranges = -std::numeric_limits<double>::infinity();
  // V_k carries both users' streams on their matched filters
  std::vector<CMat> V(s.K);
  for (int k = 0; k < s.K; ++k) {
    V[k] = CMat::Zero(s.N, s.N);
    for (int i = 0; i < 2; ++i) {
      const CVec v = s.g(i, k).normalized();
      V[k] += p(i, k) * v * v.adjoint();
    }
  }
  for (int i = 0; i < 2; ++i) {
    std::vector<CVec> w(s.K);
    for (int k = 0; k < s.K; ++k) w[k] = s.h(i, k).normalized();
    for (int k = 0; k < s.K; ++k) {
      const double need = rate_power(s.rate(i, k));
      const double sinr = uplink_sinr(s, q, w, i, k);
      r.uplink = std::max(r.uplink, (need - (1.0 + sinr)) / need);
      r.downlink = std::max(r.downlink,
                            downlink_residual(s, downlink_sinr_rate(s, V, beta, i, k).sinr, i, k));
      r.harvest = std::max(r.harvest, harvest_residual(s, V, q, beta, i, k));
      r.ranges = std::max({r.ranges, beta(i, k) - 1.0, -beta(i, k), -q(i, k), -p(i, k)});
    }
  }
  r.norms = 0.0;
  finalize(r, tol);
  return r;
}

}  // namespace twr
