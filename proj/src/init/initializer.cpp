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


#include "twr/init/initializer.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <random>

namespace twr {

CombiningWeight best_combining_weight(const CVec& e1, const CVec& e2) {
  const double n1 = e1.norm();
  const cplx e1e2 = e1.dot(e2);  // e1^H e2
  const CVec eb = e2 - (e1e2 / (n1 * n1)) * e1;
  const double nb = eb.norm();
  const double c = std::abs(e1e2) / n1;
  auto value = [&](double a) {
    return std::min(std::sqrt(a) * n1, std::sqrt(a) * c + std::sqrt(std::max(0.0, 1.0 - a)) * nb);
  };
  std::vector<double> cand{1.0};
  const double n2 = e2.norm();
  if (n2 > 0.0) cand.push_back(std::min(1.0, std::norm(e1e2) / (n1 * n1 * n2 * n2)));
  if (n1 >= c && nb > 0.0) cand.push_back(nb * nb / ((n1 - c) * (n1 - c) + nb * nb));
  CombiningWeight best;
  best.value = -1.0;
  for (double a : cand) {
    const double v = value(a);
    if (v > best.value) best.value = v, best.a = a;
  }
  if (nb <= 1e-14 * std::max(n2, 1e-300)) {
    best.u = e1 / n1;
  } else {
    const cplx e2e1 = std::conj(e1e2);
    const cplx ph = std::abs(e2e1) > 0.0 ? e2e1 / std::abs(e2e1) : cplx(1.0, 0.0);
    best.u = std::sqrt(best.a) * e1 / n1 + std::sqrt(1.0 - best.a) * ph * eb / nb;
  }
  return best;
}

namespace {

double gain(const CVec& w, const CVec& h) { return std::norm(w.dot(h)); }

double interference(const Scenario& s, const std::vector<CVec>& w, const UserMap<double>& xi,
                    int k) {
  double acc = 0.0;
  for (int l = 0; l < s.K; ++l) {
    if (l == k) continue;
    for (int j = 0; j < 2; ++j) acc += gain(w[k], s.h(j, l)) / xi(j, l);
  }
  return acc;
}

/// D and R as dense matrices in the flat user order 2k + i.
void build_d_r(const Scenario& s, const DerivedCoefficients& c, const std::vector<CVec>& w,
               RVec& D, RMat& R) {
  const int U = 2 * s.K;
  D.resize(U);
  R = RMat::Zero(U, U);
  for (int k = 0; k < s.K; ++k)
    for (int i = 0; i < 2; ++i) {
      const double gk = gain(w[k], s.h(i, k));
      if (!(gk > 0.0)) throw std::invalid_argument("xi_update: receive beam orthogonal to a user");
      D[UserMap<double>::flat(i, k)] = c.alpha(i, k) / gk;
      for (int l = 0; l < s.K; ++l) {
        if (l == k) continue;
        for (int j = 0; j < 2; ++j)
          R(UserMap<double>::flat(j, l), UserMap<double>::flat(i, k)) = gain(w[k], s.h(j, l));
      }
    }
}

/// Perron eigenpair of a nonnegative matrix by power iteration, falling back
/// to a full eigendecomposition if the iteration does not settle.
std::pair<double, RVec> perron(const RMat& M) {
  const int n = static_cast<int>(M.rows());
  RVec x = RVec::Ones(n) / std::sqrt(double(n));
  double lam = 0.0;
  for (int it = 0; it < 20000; ++it) {
    RVec y = M * x;
    const double ny = y.norm();
    if (!(ny > 0.0)) break;
    y /= ny;
    const double diff = (y - x).norm();
    x = y;
    lam = ny;
    if (diff < 1e-12) return {x.dot(M * x), x};
  }
  Eigen::EigenSolver<RMat> es(M);
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (es.eigenvalues()[i].real() > es.eigenvalues()[best].real()) best = i;
  RVec v = es.eigenvectors().col(best).real();
  if (v.sum() < 0.0) v = -v;
  (void)lam;
  return {es.eigenvalues()[best].real(), v / v.norm()};
}

}  // namespace

double min_ratio(const Scenario& s, const DerivedCoefficients& c, const std::vector<CVec>& w,
                 const UserMap<double>& xi) {
  double r = std::numeric_limits<double>::infinity();
  for (int k = 0; k < s.K; ++k) {
    const double den = interference(s, w, xi, k) + s.sigma_r2;
    for (int i = 0; i < 2; ++i)
      r = std::min(r, gain(w[k], s.h(i, k)) / xi(i, k) / (c.alpha(i, k) * den));
  }
  return r;
}

std::vector<CVec> maxmin_w_update(const Scenario& s, const DerivedCoefficients& c,
                                  const UserMap<double>& xi) {
  std::vector<CVec> w(s.K);
  for (int k = 0; k < s.K; ++k) {
    CMat J = s.sigma_r2 * CMat::Identity(s.N, s.N);
    for (int l = 0; l < s.K; ++l) {
      if (l == k) continue;
      for (int j = 0; j < 2; ++j) J += s.h(j, l) * s.h(j, l).adjoint() / xi(j, l);
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(J);
    const RVec isq = es.eigenvalues().cwiseSqrt().cwiseInverse();
    const CMat Jis = es.eigenvectors() * isq.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    const CVec e1 = Jis * s.h(0, k) / std::sqrt(c.alpha(0, k) * xi(0, k));
    const CVec e2 = Jis * s.h(1, k) / std::sqrt(c.alpha(1, k) * xi(1, k));
    const auto cw = best_combining_weight(e1, e2);
    w[k] = (Jis * cw.u).normalized();
  }
  return w;
}

XiUpdate xi_update(const Scenario& s, const DerivedCoefficients& c, const std::vector<CVec>& w,
                   double P) {
  const int U = 2 * s.K;
  RVec D;
  RMat R;
  build_d_r(s, c, w, D, R);
  const RMat DRt = D.asDiagonal() * R.transpose();
  RMat M(U + 1, U + 1);
  M.topLeftCorner(U, U) = DRt;
  M.topRightCorner(U, 1) = s.sigma_r2 * D;
  M.bottomLeftCorner(1, U) = RVec::Ones(U).transpose() * DRt / P;
  M(U, U) = s.sigma_r2 * D.sum() / P;
  auto [lam, v] = perron(M);
  if (!(v[U] > 0.0)) throw std::runtime_error("xi_update: dominant eigenvector has no positive tail");
  v /= v[U];
  XiUpdate out;
  out.xi = UserMap<double>(s.K);
  for (int u = 0; u < U; ++u) {
    if (!(v[u] > 0.0)) throw std::runtime_error("xi_update: nonpositive power in eigenvector");
    out.xi[u] = 1.0 / v[u];
  }
  out.ratio = 1.0 / lam;
  return out;
}

std::optional<UserMap<double>> activated_powers(const Scenario& s, const DerivedCoefficients& c,
                                                const std::vector<CVec>& w) {
  const int U = 2 * s.K;
  RVec D;
  RMat R;
  build_d_r(s, c, w, D, R);
  const RMat Mx = RMat::Identity(U, U) - D.asDiagonal() * R.transpose();
  const RVec q = s.sigma_r2 * Mx.partialPivLu().solve(D);
  if (!q.allFinite() || (q.array() <= 0.0).any()) return std::nullopt;
  UserMap<double> out(s.K);
  for (int u = 0; u < U; ++u) out[u] = q[u];
  return out;
}

double default_power_budget(const Scenario& s, const DerivedCoefficients& c) {
  double ma = 0.0, mh = 0.0;
  for (int u = 0; u < 2 * s.K; ++u) ma += c.alpha[u], mh += s.h[u].squaredNorm();
  ma /= 2 * s.K;
  mh /= 2 * s.K;
  return 1000.0 * s.K * s.sigma_r2 * ma / mh;
}

UserMap<double> mu_from_xi(const Scenario& s, const UserMap<double>& xi) {
  UserMap<double> mu(s.K);
  for (int u = 0; u < 2 * s.K; ++u)
    mu[u] = std::sqrt(std::max(0.0, 1.0 / xi[u] + 2.0 * s.p_c - 2.0 * s.E[u]));
  return mu;
}

InitPoint cp_free_initialize(const Scenario& s, const DerivedCoefficients& c,
                             const CpFreeOptions& opts) {
  const double P = opts.P > 0.0 ? opts.P : default_power_budget(s, c);
  const int U = 2 * s.K;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  InitPoint best;
  for (int r = 0; r <= opts.restarts; ++r) {
    InitPoint ip;
    ip.restarts = r;
    UserMap<double> xi(s.K);
    if (r == 0) {
      for (auto& x : xi) x = U / P;
    } else {
      std::vector<double> wts(U);
      double sum = 0.0;
      for (auto& x : wts) sum += (x = unif(rng));
      for (int u = 0; u < U; ++u) xi[u] = sum / (P * wts[u]);
    }
    std::vector<CVec> w;
    try {
      for (int a = 0; a < opts.max_alt; ++a) {
        ip.alternations = a + 1;
        w = maxmin_w_update(s, c, xi);
        ip.ratio_trace.push_back(min_ratio(s, c, w, xi));
        auto xu = xi_update(s, c, w, P);
        xi = xu.xi;
        ip.ratio_trace.push_back(min_ratio(s, c, w, xi));
        if (ip.ratio_trace.back() >= 1.0) break;
      }
    } catch (const std::exception&) {
      continue;
    }
    ip.ratio = ip.ratio_trace.empty() ? 0.0 : ip.ratio_trace.back();
    ip.w0 = w;
    ip.xi0 = xi;
    if (ip.ratio >= 1.0) {
      auto q = activated_powers(s, c, w);
      if (q) {
        for (int u = 0; u < U; ++u) ip.xi0[u] = 1.0 / (*q)[u];
        ip.ratio = min_ratio(s, c, w, ip.xi0);
        ip.feasible = ip.ratio >= 1.0 - 1e-9;
      }
    }
    ip.mu0 = mu_from_xi(s, ip.xi0);
    if (ip.feasible) return ip;
    if (r == 0 || ip.ratio > best.ratio) best = std::move(ip);
  }
  return best;
}

InitPoint zf_initialize(const Scenario& s, const DerivedCoefficients& c) {
  if (s.N < 2 * s.K - 1)
    throw std::invalid_argument("zf_initialize: requires N >= 2K - 1");
  InitPoint ip;
  ip.w0.resize(s.K);
  for (int k = 0; k < s.K; ++k) {
    CMat pair(s.N, 2);
    pair.col(0) = s.h(0, k);
    pair.col(1) = s.h(1, k);
    CMat proj = pair;
    if (s.K > 1) {
      CMat others(s.N, 2 * (s.K - 1));
      int col = 0;
      for (int l = 0; l < s.K; ++l)
        if (l != k)
          for (int j = 0; j < 2; ++j) others.col(col++) = s.h(j, l);
      Eigen::JacobiSVD<CMat> svd(others, Eigen::ComputeFullU);
      const RVec sv = svd.singularValues();
      int rank = 0;
      for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-12 * sv[0]) ++rank;
      const CMat Ub = svd.matrixU().leftCols(rank);
      proj = pair - Ub * (Ub.adjoint() * pair);
    }
    Eigen::JacobiSVD<CMat> ps(proj, Eigen::ComputeThinU);
    ip.w0[k] = ps.matrixU().col(0).normalized();
    const double floor = 1e-6 * std::min(proj.col(0).norm(), proj.col(1).norm());
    if (std::abs(ip.w0[k].dot(proj.col(0))) < floor || std::abs(ip.w0[k].dot(proj.col(1))) < floor) {
      // dominant direction misses a partner: balance the two projected gains instead
      const CVec e1 = proj.col(0) / std::sqrt(c.alpha(0, k));
      const CVec e2 = proj.col(1) / std::sqrt(c.alpha(1, k));
      if (e1.norm() > 0.0) ip.w0[k] = best_combining_weight(e1, e2).u.normalized();
    }
  }
  ip.xi0 = UserMap<double>(s.K);
  for (int k = 0; k < s.K; ++k)
    for (int i = 0; i < 2; ++i) {
      const double gk = gain(ip.w0[k], s.h(i, k));
      if (!(gk > 0.0)) throw std::runtime_error("zf_initialize: projection removed a pair channel");
      ip.xi0(i, k) = gk / (c.alpha(i, k) * s.sigma_r2);
    }
  ip.mu0 = mu_from_xi(s, ip.xi0);
  ip.ratio = min_ratio(s, c, ip.w0, ip.xi0);
  ip.feasible = true;
  return ip;
}

}  // namespace twr
