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


#include "twr/multipair/multipair.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace twr {

double phi(const CVec& w, double xi, const CVec& h) { return -std::norm(w.dot(h)) / xi; }

double phi_tilde(const CVec& w, double xi, const CVec& wn, double xin, const CVec& h) {
  const cplx a = wn.dot(h);  // wn^H h
  const cplx b = h.dot(w);   // h^H w
  return -2.0 * (a * b).real() / xin + std::norm(a) / (xin * xin) * xi;
}

CMat downlink_basis(const Scenario& s) {
  CMat Gm(s.N, 2 * s.K);
  for (int u = 0; u < 2 * s.K; ++u) Gm.col(u) = s.g[u];
  Eigen::JacobiSVD<CMat> svd(Gm, Eigen::ComputeThinU);
  const RVec sv = svd.singularValues();
  int r = 0;
  for (int a = 0; a < sv.size(); ++a)
    if (sv[a] > 1e-12 * sv[0]) ++r;
  return svd.matrixU().leftCols(std::max(r, 1));
}

SplitScale split_scale(const Scenario& s, double theta, double mu) {
  const double u = s.sigma_r2;
  const double rx = std::max(theta * (s.sigma_u2 + s.sigma_z2), mu * mu / s.eta) / u;
  SplitScale out;
  out.beta = std::min(0.5, theta * s.sigma_z2 / (u * rx));
  out.down = std::sqrt(s.sigma_z2 / u) / out.beta;
  out.harvest = std::sqrt(rx / s.eta);
  return out;
}

P2RProgram build_p2r(const Scenario& s, const DerivedCoefficients& c, const DcState& st) {
  if (static_cast<int>(st.w.size()) != s.K || st.xi.pairs() != s.K || st.mu.pairs() != s.K)
    throw std::invalid_argument("build_p2r: expansion point does not match the scenario");
  for (int u = 0; u < 2 * s.K; ++u)
    if (!(st.xi[u] > 0.0) || !std::isfinite(st.xi[u]) || !std::isfinite(st.mu[u]))
      throw std::invalid_argument("build_p2r: expansion point needs finite xi > 0");

  using conic::Affine;
  using conic::ComplexAffine;
  P2RProgram out;
  auto& p = out.problem;
  const double u = s.sigma_r2;
  const double su = std::sqrt(u);
  out.unit = u;
  out.basis = downlink_basis(s);
  const int r = static_cast<int>(out.basis.cols());
  const int K = s.K, N = s.N;

  UserMap<CMat> C(K);
  for (int x = 0; x < 2 * K; ++x) {
    const CVec gt = out.basis.adjoint() * s.g[x];
    C[x] = gt * gt.adjoint();
  }
  UserMap<double> xin(K), mun(K);
  for (int x = 0; x < 2 * K; ++x) xin[x] = st.xi[x] * u, mun[x] = st.mu[x] / su;

  for (int k = 0; k < K; ++k) {
    double need = 0.0;
    for (int i = 0; i < 2; ++i)
      need = std::max(need, std::max(c.theta(i, k) * (s.sigma_u2 + s.sigma_z2),
                                     st.mu(i, k) * st.mu(i, k) / s.eta) /
                                s.g(i, k).squaredNorm());
    out.V.push_back(p.add_herm("V" + std::to_string(k), r, true, std::max(need / u, 1.0)));
  }
  for (int k = 0; k < K; ++k) {
    out.w.push_back(p.add_cvec("w" + std::to_string(k), N, 1.0 / std::sqrt(double(N))));
    std::vector<std::tuple<int, int, ComplexAffine>> e;
    e.emplace_back(0, 0, Affine(1.0));
    for (int a = 0; a < 2 * N; ++a) {
      e.emplace_back(0, a + 1, Affine::var(out.w[k].first + a));
      e.emplace_back(a + 1, a + 1, Affine(1.0));
    }
    p.add_lmi(2 * N + 1, std::move(e), "wnorm" + std::to_string(k));
  }
  out.xi = out.t = out.beta = out.mu = UserMap<conic::Var>(K);
  for (int x = 0; x < 2 * K; ++x) {
    const std::string tag = std::to_string(x);
    out.xi[x] = p.add_var("xi" + tag, xin[x]);
    out.t[x] = p.add_var("t" + tag, 1.0 / xin[x]);
    out.beta[x] = p.add_var("beta" + tag, split_scale(s, c.theta[x], st.mu[x]).beta);
    out.mu[x] = p.add_var("mu" + tag, std::max(mun[x], 1.0));
  }

  // interference slacks I_{j,l,k} >= |w_k^H h_jl|^2 / xi_jl
  std::vector<UserMap<Affine>> I(K, UserMap<Affine>(K));
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) {
      if (l == k) continue;
      for (int j = 0; j < 2; ++j) {
        const double guess = std::norm(st.w[k].dot(s.h(j, l))) / xin(j, l);
        const conic::Var v = p.add_var("I" + std::to_string(j) + std::to_string(l) +
                                           std::to_string(k),
                                       std::max(guess, 1e-3));
        I[k](j, l) = v;
        const ComplexAffine wh = out.w[k].inner_to(s.h(j, l));
        std::vector<std::tuple<int, int, ComplexAffine>> e;
        e.emplace_back(0, 0, Affine(v));
        e.emplace_back(0, 1, wh.re);
        e.emplace_back(0, 2, wh.im);
        e.emplace_back(1, 1, Affine(out.xi(j, l)));
        e.emplace_back(2, 2, Affine(out.xi(j, l)));
        p.add_lmi(3, std::move(e), "interf");
      }
    }

  Affine objective;
  for (int k = 0; k < K; ++k) objective += out.V[k].trace();
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < 2; ++i) {
      const int x = UserMap<double>::flat(i, k);
      const CVec& h = s.h(i, k);
      // uplink: alpha (sum I + 1) + phi_tilde <= 0
      Affine up = Affine(c.alpha(i, k));
      for (int l = 0; l < K; ++l)
        if (l != k)
          for (int j = 0; j < 2; ++j) up += c.alpha(i, k) * I[k](j, l);
      const cplx wnh = st.w[k].dot(h);
      up -= (2.0 / xin[x]) * out.w[k].inner_from(h * std::conj(wnh)).re;
      up += (std::norm(wnh) / (xin[x] * xin[x])) * Affine(out.xi[x]);
      p.add_le(up, "uplink" + std::to_string(x));

      Affine own = out.V[k].trace_with(C[x]);
      Affine sig = (1.0 / c.theta(i, k)) * own - s.sigma_u2 / u;
      Affine rx = own + s.sigma_u2 / u;
      for (int l = 0; l < K; ++l) {
        if (l == k) continue;
        const Affine tl = out.V[l].trace_with(C[x]);
        sig -= tl;
        rx += tl;
      }
      const SplitScale sc = split_scale(s, c.theta[x], st.mu[x]);
      p.schur_lmi((1.0 / sc.down) * sig, std::sqrt(s.sigma_z2 / u), sc.down * Affine(out.beta[x]),
                  "downlink" + std::to_string(x));
      // implied by the harvest LMI, but only up to that block's scale
      p.add_le(Affine(out.beta[x]) - 1.0, "beta_max" + std::to_string(x));
      p.schur_lmi((1.0 / sc.harvest) * rx, out.mu[x],
                  sc.harvest * s.eta * (1.0 - Affine(out.beta[x])), "harvest" + std::to_string(x));
      p.add_le(Affine(out.t[x]) - (2.0 * mun[x]) * Affine(out.mu[x]) + mun[x] * mun[x] +
                   (2.0 * s.p_c - 2.0 * s.E[x]) / u,
               "energy" + std::to_string(x));
      p.schur_lmi(out.t[x], 1.0, out.xi[x], "epigraph" + std::to_string(x));
      objective += out.t[x];
    }
  p.minimize(objective);
  return out;
}

RecoveredBeamformer recover(const CMat& V, double rank_tol) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (V + V.adjoint()));
  const int n = static_cast<int>(V.rows());
  const RVec lam = es.eigenvalues().reverse();
  const CMat U = es.eigenvectors().rowwise().reverse();
  RecoveredBeamformer rb;
  rb.power = V.trace().real();
  const double l1 = std::max(lam[0], 0.0);
  rb.eig_ratio2 = n > 1 && l1 > 0.0 ? std::max(lam[1], 0.0) / l1 : 0.0;
  rb.eig_ratio3 = n > 2 && l1 > 0.0 ? std::max(lam[2], 0.0) / l1 : 0.0;
  if (rb.eig_ratio2 <= rank_tol) {
    rb.kind = RecoveredBeamformer::Kind::rank_one;
    rb.v = U.col(0);
    return rb;
  }
  if (rb.eig_ratio3 > rank_tol)
    throw RankViolation("recover: covariance has rank above two (lambda3/lambda1 = " +
                        std::to_string(rb.eig_ratio3) + ")");
  rb.kind = RecoveredBeamformer::Kind::rank_two;
  rb.F.resize(n, 2);
  rb.F.col(0) = std::sqrt(lam[0] / rb.power) * U.col(0);
  rb.F.col(1) = std::sqrt(lam[1] / rb.power) * U.col(1);
  return rb;
}

std::vector<CMat> alamouti_blocks(const CVec& symbols) {
  if (symbols.size() % 2 != 0) throw std::invalid_argument("alamouti_blocks: odd symbol count");
  std::vector<CMat> out;
  for (Eigen::Index m = 0; m < symbols.size(); m += 2) {
    CMat B(2, 2);
    B << symbols[m], symbols[m + 1], -std::conj(symbols[m + 1]), std::conj(symbols[m]);
    out.push_back(B);
  }
  return out;
}

void settle_splitting(const Scenario& s, const DerivedCoefficients& c, DesignSolution& sol,
                      bool harvest_first) {
  sol.beta = sol.mu = UserMap<double>(s.K);
  for (int k = 0; k < s.K; ++k)
    for (int i = 0; i < 2; ++i) {
      const int x = UserMap<double>::flat(i, k);
      double own = 0.0, other = 0.0;
      for (int l = 0; l < s.K; ++l) {
        const double v = (s.g[x].adjoint() * sol.V[l] * s.g[x])(0, 0).real();
        (l == k ? own : other) += v;
      }
      const double sig = own / c.theta[x] - other - s.sigma_u2;
      const double rx = own + other + s.sigma_u2;
      const double need = std::max(0.0, sol.q[x] + 2.0 * s.p_c - 2.0 * s.E[x]);
      const double hi = std::min(1.0, 1.0 - need / (s.eta * rx));
      const double lo = sig > 0.0 ? s.sigma_z2 / sig : std::numeric_limits<double>::infinity();
      const double tiny = std::numeric_limits<double>::min();
      double b = std::clamp(hi, tiny, 1.0);
      if (hi < lo && !harvest_first) {
        // interval collapsed under round-off: take the endpoint with the smaller violation
        auto violation = [&](double bb) {
          const double gam = bb * own / (bb * (other + s.sigma_u2) + s.sigma_z2);
          const double r = rate_power(s.rate(1 - i, k));
          const double down = (r - 1.0 - gam) / r;
          const double budget = s.eta * (1.0 - bb) * rx + 2.0 * s.E[x] - 2.0 * s.p_c;
          const double harv = (sol.q[x] - budget) / std::max({sol.q[x], std::abs(budget), tiny});
          return std::max(down, harv);
        };
        const double b_lo = std::clamp(lo, tiny, 1.0);
        if (violation(b_lo) < violation(b)) b = b_lo;
      }
      sol.beta[x] = b;
      sol.mu[x] = std::sqrt(need);
    }
}

bool repair_downlink(const Scenario& s, const DerivedCoefficients& c, DesignSolution& sol) {
  const int K = s.K;
  // T[x][l] = g_x^H V_l g_x
  std::vector<std::vector<double>> T(2 * K, std::vector<double>(K));
  for (int x = 0; x < 2 * K; ++x)
    for (int l = 0; l < K; ++l) T[x][l] = (s.g[x].adjoint() * sol.V[l] * s.g[x])(0, 0).real();
  std::vector<double> scale(K, 1.0);
  for (int it = 0; it < 1000; ++it) {
    std::vector<double> next(K, 1.0);
    for (int x = 0; x < 2 * K; ++x) {
      const int k = x / 2;
      if (!(T[x][k] > 0.0)) return false;
      double other = 0.0;
      for (int l = 0; l < K; ++l)
        if (l != k) other += scale[l] * T[x][l];
      const double b = std::clamp(sol.beta[x], std::numeric_limits<double>::min(), 1.0);
      next[k] = std::max(next[k], c.theta[x] * (other + s.sigma_u2 + s.sigma_z2 / b) / T[x][k]);
    }
    double diff = 0.0;
    for (int k = 0; k < K; ++k) diff = std::max(diff, std::abs(next[k] - scale[k]));
    scale = next;
    if (diff <= 1e-15) break;
  }
  for (int k = 0; k < K; ++k)
    if (!std::isfinite(scale[k]) || scale[k] > 1.01) return false;
  for (int k = 0; k < K; ++k) sol.V[k] *= scale[k];
  return true;
}

void polish_splitting(const Scenario& s, const DerivedCoefficients& c, DesignSolution& sol) {
  DesignSolution trial = sol;
  settle_splitting(s, c, trial, true);
  if (repair_downlink(s, c, trial)) {
    settle_splitting(s, c, trial);
    sol = std::move(trial);
    return;
  }
  settle_splitting(s, c, sol);
  if (repair_downlink(s, c, sol)) settle_splitting(s, c, sol);
}

namespace {

struct Extracted {
  DcState state;
  std::vector<CMat> V;
  UserMap<double> beta;
};

Extracted extract(const Scenario& s, const P2RProgram& prog, const conic::ConicSolution& sol,
                  int n) {
  Extracted e;
  const double u = prog.unit, su = std::sqrt(u);
  e.state.n = n;
  e.state.xi = e.state.mu = e.beta = UserMap<double>(s.K);
  double obj = 0.0;
  for (int k = 0; k < s.K; ++k) {
    CMat Vt = sol.value(prog.V[k]);
    Vt = 0.5 * (Vt + Vt.adjoint());
    e.V.push_back(u * prog.basis * Vt * prog.basis.adjoint());
    e.state.w.push_back(sol.value(prog.w[k]));
    obj += e.V.back().trace().real();
  }
  for (int x = 0; x < 2 * s.K; ++x) {
    e.state.xi[x] = sol.value(prog.xi[x]) / u;
    e.state.mu[x] = sol.value(prog.mu[x]) * su;
    e.beta[x] = sol.value(prog.beta[x]);
    obj += u * sol.value(prog.t[x]);
  }
  e.state.objective = obj;
  return e;
}

// mu is not unique at the optimum of the convexified program. Expanding at
// the largest value the harvest LMI admits gives the tightest next tangent.
void tighten_mu(const Scenario& s, Extracted& e) {
  for (int x = 0; x < 2 * s.K; ++x) {
    double rx = s.sigma_u2;
    for (const auto& V : e.V) rx += (s.g[x].adjoint() * V * s.g[x])(0, 0).real();
    const double b = std::clamp(e.beta[x], 0.0, 1.0);
    e.state.mu[x] = std::max(e.state.mu[x], std::sqrt(s.eta * (1.0 - b) * rx));
  }
}

bool usable(const conic::ConicSolution& sol) {
  return sol.status == SolveStatus::optimal || sol.near_optimal;
}

}  // namespace

DcResult dc_solve(const Scenario& s, const DerivedCoefficients& c, const InitPoint& init,
                  const DcOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  DcResult res;
  auto& rep = res.report;
  if (!init.feasible) {
    rep.status = SolveStatus::infeasible;
    rep.message = "initial point is not feasible";
    return res;
  }
  DcState cur;
  cur.w = init.w0;
  cur.xi = init.xi0;
  cur.mu = init.mu0;
  cur.objective = std::numeric_limits<double>::infinity();

  std::optional<Extracted> best;
  bool converged = false;
  bool failed = false;
  for (int n = 0; n < opts.max_iter; ++n) {
    const P2RProgram prog = build_p2r(s, c, cur);
    const auto sol = conic::solve(prog.problem, opts.solver);
    if (!usable(sol)) {
      if (!best) {
        rep.status = sol.status == SolveStatus::infeasible ? SolveStatus::infeasible
                                                           : SolveStatus::numerical_failure;
        rep.message = "convexified program at the initial point: " + to_string(sol.status);
        rep.iterations = n;
        return res;
      }
      failed = true;
      rep.message = "subproblem " + std::to_string(n + 1) + ": " + to_string(sol.status);
      break;
    }
    Extracted ex = extract(s, prog, sol, n + 1);
    tighten_mu(s, ex);
    const double obj = ex.state.objective;
    if (best && obj > cur.objective * (1.0 + 1e-9)) {
      // numerical increase: keep the previous iterate
      converged = true;
      break;
    }
    rep.objective_trace.push_back(obj);
    rep.residual_trace.push_back(sol.primal_residual);
    const double prev = cur.objective;
    cur = ex.state;
    best = std::move(ex);
    res.states.push_back(cur);
    rep.iterations = n + 1;
    if (std::isfinite(prev) && (prev - obj) <= opts.rel_tol * prev) {
      converged = true;
      break;
    }
  }
  if (!best) {
    rep.status = SolveStatus::numerical_failure;
    return res;
  }

  DesignSolution& d = res.solution;
  d.w = best->state.w;
  bool renormalized = false;
  for (auto& w : d.w) {
    const double nw = w.norm();
    renormalized = renormalized || nw < 1.0 - 1e-7;
    w /= nw;
  }
  if (renormalized) rep.message += (rep.message.empty() ? "" : "; ") + std::string("renormalized w");
  d.V = best->V;
  d.q = UserMap<double>(s.K);
  for (int x = 0; x < 2 * s.K; ++x) d.q[x] = 1.0 / best->state.xi[x];
  if (opts.reactivate_q) {
    if (auto qa = activated_powers(s, c, d.w)) {
      bool below = true;
      for (int x = 0; x < 2 * s.K; ++x) below = below && (*qa)[x] <= d.q[x] * (1.0 + 1e-6);
      if (below) d.q = *qa;
    }
  }
  polish_splitting(s, c, d);
  d.objective = d.relay_power() + d.user_power();
  try {
    for (const auto& V : d.V) d.recovered.push_back(recover(V, opts.rank_tol));
  } catch (const RankViolation& e) {
    failed = true;
    rep.message += (rep.message.empty() ? "" : "; ") + std::string(e.what());
  }
  rep.status = failed      ? SolveStatus::numerical_failure
               : converged ? SolveStatus::optimal
                           : SolveStatus::max_iterations;
  rep.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

void write_dc_trace_csv(std::ostream& os, const SolveReport& report) {
  os << "n,objective_W,objective_dBm,max_residual\n" << std::setprecision(17);
  for (size_t n = 0; n < report.objective_trace.size(); ++n) {
    const double r = n < report.residual_trace.size() ? report.residual_trace[n] : 0.0;
    os << n + 1 << ',' << report.objective_trace[n] << ','
       << dbm_from_linear(report.objective_trace[n]) << ',' << r << '\n';
  }
}

}  // namespace twr
