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


#include "twr/onepair/onepair.hpp"

#include "twr/conic/solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <limits>

namespace twr {

BeamDirection w_of_gamma(double gamma, const CVec& h1, const CVec& h2) {
  const double n1 = h1.norm();
  if (!(n1 > 0.0)) throw std::invalid_argument("w_of_gamma: h1 must be nonzero");
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("w_of_gamma: gamma outside [0,1]");
  const cplx h1h2 = h1.dot(h2);  // h1^H h2
  const CVec hb = h2 - (h1h2 / (n1 * n1)) * h1;
  BeamDirection out;
  if (hb.norm() < 1e-12 * h2.norm() || h2.norm() == 0.0) {
    out.w = h1 / n1;
    out.degenerate = true;
    return out;
  }
  const cplx h2h1 = std::conj(h1h2);
  const cplx phase = std::abs(h2h1) > 0.0 ? h2h1 / std::abs(h2h1) : cplx(1.0, 0.0);
  out.w = std::sqrt(gamma) * h1 / n1 + std::sqrt(1.0 - gamma) * phase * hb / hb.norm();
  return out;
}

CMat span_basis(const CVec& g1, const CVec& g2) {
  const auto N = g1.size();
  CMat G(N, 2);
  G.col(0) = g1.normalized();
  CVec r = g2 - G.col(0) * G.col(0).dot(g2);
  if (r.norm() <= 1e-12 * g2.norm() || N == 1) {
    // any unit vector orthogonal to g1
    int best = 0;
    for (int n = 1; n < N; ++n)
      if (std::abs(G(n, 0)) < std::abs(G(best, 0))) best = n;
    r = CVec::Zero(N);
    r[best] = 1.0;
    r -= G.col(0) * G.col(0).dot(r);
  }
  G.col(1) = r.normalized();
  return G;
}

namespace {

// Largest splitting ratio the harvest constraint allows for the given A. Any
// beta between the program's value and this one is optimal; the largest is
// the canonical choice.
void widen_beta(const Scenario& s, GammaPoint& pt) {
  for (int i = 0; i < 2; ++i) {
    const CVec gi = pt.G.adjoint() * s.g(i, 0);
    const double rx = (gi.adjoint() * pt.A * gi)(0, 0).real() + s.sigma_u2;
    const double cap = 1.0 - pt.mu[i] * pt.mu[i] / (s.eta * rx);
    pt.beta[i] = std::clamp(std::max(pt.beta[i], cap), 0.0, 1.0);
  }
}

}  // namespace

std::optional<GammaPoint> solve_p4_fixed_gamma(const Scenario& s, const DerivedCoefficients& c,
                                               double gamma, const OnePairOptions& opts) {
  if (s.K != 1) throw std::invalid_argument("solve_p4_fixed_gamma: requires K = 1");
  GammaPoint pt;
  pt.gamma = gamma;
  pt.w = w_of_gamma(gamma, s.h(0, 0), s.h(1, 0)).w;
  pt.G = span_basis(s.g(0, 0), s.g(1, 0));

  const double u = s.sigma_r2;  // power unit inside the program
  double req[2];
  for (int i = 0; i < 2; ++i) {
    const double gain = std::norm(pt.w.dot(s.h(i, 0)));
    if (!(gain > 1e-300)) return std::nullopt;
    pt.q[i] = c.alpha(i, 0) * s.sigma_r2 / gain;
    if (!std::isfinite(pt.q[i])) return std::nullopt;
    pt.mu[i] = std::sqrt(std::max(0.0, pt.q[i] + 2.0 * s.p_c - 2.0 * s.E(i, 0)));
    req[i] = std::max(c.theta(i, 0) * (s.sigma_u2 + s.sigma_z2),
                      pt.mu[i] * pt.mu[i] / s.eta) /
             s.g(i, 0).squaredNorm();
  }

  conic::ConicProblem p;
  const double a_scale = std::max(req[0], req[1]) / u;
  conic::HermVar A = p.add_herm("A", 2, true, a_scale);
  conic::Affine beta[2];
  for (int i = 0; i < 2; ++i) {
    if (opts.fixed_beta)
      beta[i] = conic::Affine(*opts.fixed_beta);
    else
      beta[i] = p.add_var("beta" + std::to_string(i), 0.5);
  }
  for (int i = 0; i < 2; ++i) {
    const CVec gi = pt.G.adjoint() * s.g(i, 0);
    const CMat Ci = gi * gi.adjoint();
    const conic::Affine tr = A.trace_with(Ci);
    p.schur_lmi((1.0 / c.theta(i, 0)) * tr - s.sigma_u2 / u, std::sqrt(s.sigma_z2 / u), beta[i],
                "downlink" + std::to_string(i));
    p.schur_lmi(tr + s.sigma_u2 / u, pt.mu[i] / std::sqrt(u), s.eta * (1.0 - beta[i]),
                "harvest" + std::to_string(i));
  }
  p.minimize(A.trace());
  const auto sol = conic::solve(p);
  if (sol.status == SolveStatus::infeasible) return std::nullopt;
  if (sol.status != SolveStatus::optimal && !sol.near_optimal) return std::nullopt;
  pt.A = sol.value(A) * u;
  for (int i = 0; i < 2; ++i) pt.beta[i] = std::clamp(sol.value(beta[i]), 0.0, 1.0);
  if (!opts.fixed_beta) widen_beta(s, pt);
  pt.objective = pt.A.trace().real() + pt.q[0] + pt.q[1];
  return pt;
}

std::optional<CMat> rank_one_extract(const CMat& A, const std::vector<CMat>& constraints) {
  Eigen::SelfAdjointEigenSolver<CMat> es(A);
  const double l1 = es.eigenvalues()[1], l2 = es.eigenvalues()[0];
  if (!(l1 > 0.0)) return std::nullopt;
  const CVec u1 = es.eigenvectors().col(1);
  if (l2 <= 1e-6 * l1) {
    // truncate, then rescale so no constraint value decreases
    CMat T = l1 * u1 * u1.adjoint();
    double f = 1.0;
    for (const auto& C : constraints) {
      const double before = (C * A).trace().real(), after = (C * T).trace().real();
      if (after > 0.0 && before > after) f = std::max(f, before / after);
    }
    return CMat(f * T);
  }
  // Hermitian D = [[d11, r + j m], [r - j m, d22]] with Tr(C D) = 0 for every
  // constraint and Tr(D) = 0.
  const int rows = static_cast<int>(constraints.size()) + 1;
  RMat L(rows, 4);
  auto row_of = [](const CMat& C) {
    Eigen::RowVector4d r;
    r << C(0, 0).real(), C(1, 1).real(), 2.0 * C(0, 1).real(), 2.0 * C(0, 1).imag();
    return r;
  };
  for (int i = 0; i < rows - 1; ++i) L.row(i) = row_of(constraints[i]);
  L.row(rows - 1) = row_of(CMat::Identity(2, 2));
  Eigen::JacobiSVD<RMat> svd(L, Eigen::ComputeFullV);
  const RVec sv = svd.singularValues();
  const int rank = static_cast<int>((sv.array() > 1e-12 * std::max(sv.maxCoeff(), 1e-300)).count());
  if (rank >= 4) return std::nullopt;
  const RVec d = svd.matrixV().col(3);
  CMat D(2, 2);
  D(0, 0) = d[0];
  D(1, 1) = d[1];
  // Tr(C D) = C00 d11 + C11 d22 + 2 Re(C01 conj(D01)) => D01 = r + j m
  D(0, 1) = cplx(d[2], d[3]);
  D(1, 0) = std::conj(D(0, 1));
  // det(A + t D) = 0 is quadratic in t
  auto det = [](const CMat& M) { return (M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0)).real(); };
  const double c0 = det(A);
  const double c2 = det(D);
  const double c1 = (A(0, 0) * D(1, 1) + A(1, 1) * D(0, 0) - A(0, 1) * D(1, 0) - A(1, 0) * D(0, 1)).real();
  double t = std::numeric_limits<double>::infinity();
  if (std::abs(c2) > 1e-300) {
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    for (double r : {(-c1 + sq) / (2.0 * c2), (-c1 - sq) / (2.0 * c2)})
      if (std::abs(r) < std::abs(t)) t = r;
  } else if (std::abs(c1) > 0.0) {
    t = -c0 / c1;
  }
  if (!std::isfinite(t)) return std::nullopt;
  CMat R = A + t * D;
  R = 0.5 * (R + R.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMat> er(R);
  const double m1 = er.eigenvalues()[1];
  if (er.eigenvalues()[0] < -1e-9 * m1) return std::nullopt;
  const CVec v = er.eigenvectors().col(1);
  return CMat(m1 * v * v.adjoint());
}

namespace {

double objective_or_inf(const std::optional<GammaPoint>& p) {
  return p ? p->objective : std::numeric_limits<double>::infinity();
}

}  // namespace

OnePairResult solve_onepair(const Scenario& s, const OnePairOptions& opts) {
  if (s.K != 1) throw std::invalid_argument("solve_onepair: requires K = 1");
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = derive_coefficients(s);
  OnePairResult res;
  res.degenerate = w_of_gamma(0.5, s.h(0, 0), s.h(1, 0)).degenerate;

  std::optional<GammaPoint> best;
  int solves = 0;
  auto eval = [&](double gamma) {
    auto pt = solve_p4_fixed_gamma(s, c, gamma, opts);
    ++solves;
    res.evaluated.emplace_back(gamma, objective_or_inf(pt));
    // lowest gamma wins ties: only replace on strict improvement, or equal value at lower gamma
    if (pt && (!best || pt->objective < best->objective ||
               (pt->objective == best->objective && gamma < best->gamma)))
      best = pt;
    return objective_or_inf(pt);
  };

  const int G = std::max(2, opts.grid_points);
  const double h = 1.0 / (G - 1);
  for (int g = 0; g < G; ++g) eval(g * h);
  if (!best) {
    res.report.status = SolveStatus::infeasible;
    res.report.iterations = solves;
    res.report.message = "no gamma gives a feasible program";
    return res;
  }

  // golden-section refinement around the best grid point, in the beam angle
  // theta with gamma = cos^2(theta). The user gains behave like sqrt(gamma) and
  // sqrt(1 - gamma) near the ends, so the minimum can sit within 1e-6 of an end
  // in gamma but not in theta; |d gamma / d theta| <= 1 keeps the gamma tolerance.
  if (!res.degenerate) {
    const double g0 = best->gamma;
    auto theta = [](double g) { return std::acos(std::sqrt(std::clamp(g, 0.0, 1.0))); };
    auto at = [&](double th) {
      const double c = std::cos(th);
      return eval(std::clamp(c * c, 0.0, 1.0));
    };
    double a = theta(std::min(1.0, g0 + h)), b = theta(std::max(0.0, g0 - h));
    const double tol = std::min(opts.gamma_tol, 1e-7);
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = at(x1), f2 = at(x2);
    while (b - a > tol) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - r * (b - a);
        f1 = at(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + r * (b - a);
        f2 = at(x2);
      }
    }
  }

  GammaPoint pt = *best;
  std::vector<CMat> cons;
  for (int i = 0; i < 2; ++i) {
    const CVec gi = pt.G.adjoint() * s.g(i, 0);
    cons.push_back(gi * gi.adjoint());
  }
  auto A1 = rank_one_extract(pt.A, cons);
  if (!A1) {
    res.report.status = SolveStatus::numerical_failure;
    res.report.message = "rank-one extraction failed";
    return res;
  }
  pt.A = *A1;
  if (!opts.fixed_beta) widen_beta(s, pt);
  pt.objective = pt.A.trace().real() + pt.q[0] + pt.q[1];
  res.best = pt;

  DesignSolution& sol = res.solution;
  sol.w = {pt.w};
  const CMat V = pt.G * pt.A * pt.G.adjoint();
  sol.V = {0.5 * (V + V.adjoint())};
  Eigen::SelfAdjointEigenSolver<CMat> es(pt.A);
  RecoveredBeamformer rb;
  rb.kind = RecoveredBeamformer::Kind::rank_one;
  rb.power = pt.A.trace().real();
  rb.v = (pt.G * es.eigenvectors().col(1)).normalized();
  rb.eig_ratio2 = es.eigenvalues()[0] / es.eigenvalues()[1];
  rb.eig_ratio3 = 0.0;
  sol.recovered = {rb};
  sol.q = UserMap<double>(1);
  sol.beta = UserMap<double>(1);
  sol.mu = UserMap<double>(1);
  for (int i = 0; i < 2; ++i) {
    sol.q(i, 0) = pt.q[i];
    sol.beta(i, 0) = pt.beta[i];
    sol.mu(i, 0) = pt.mu[i];
  }
  sol.objective = pt.objective;

  res.report.status = SolveStatus::optimal;
  res.report.iterations = solves;
  res.report.objective_trace = {pt.objective};
  res.report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace twr
