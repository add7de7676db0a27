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


#include "twr/conic/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace twr::conic {

RMat real_embedding(const CMat& M) {
  const auto d = M.rows();
  RMat E(2 * d, 2 * d);
  E.topLeftCorner(d, d) = M.real();
  E.topRightCorner(d, d) = -M.imag();
  E.bottomLeftCorner(d, d) = M.imag();
  E.bottomRightCorner(d, d) = M.real();
  return E;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct Entry {
  int r;
  int c;
  double v;
};

struct PsdBlock {
  int dim = 0;
  int offset = 0;                       // into the cone vector
  std::vector<int> vars;                // variables touching the block
  std::vector<std::vector<Entry>> cols; // G entries per listed variable (full symmetric)
  // Nesterov-Todd scaling: W(Z) = R^T Z R, W^{-T}(S) = Q^T S Q, Q = R^{-T}.
  RMat R, Q;
  RVec lambda;
};

/// Standard form: min c'x  s.t.  A x = b,  G x + s = h,  s in K.
struct StandardForm {
  int n = 0;
  int m_lp = 0;
  int m = 0;  // total cone vector length
  int degree = 0;
  SpMat A, G, G_lp;
  RVec b, h, c;
  std::vector<PsdBlock> blocks;
  RVec scale;           // x = scale .* x_tilde
  double c_norm = 1.0;  // objective divided by this
  double c_const = 0.0;
};

void add_entry(std::map<std::pair<int, int>, std::map<int, double>>& acc, int r, int c, int var,
               double v) {
  if (v == 0.0) return;
  acc[{r, c}][var] += v;
}

StandardForm assemble(const ConicProblem& p) {
  StandardForm f;
  f.n = p.num_vars();
  f.scale = Eigen::Map<const RVec>(p.var_scales().data(), f.n);

  std::vector<Triplet> a_trip, lp_trip;
  std::vector<double> b_vals, h_lp;

  // Rows of affine constraints, in x_tilde units.
  auto scaled_row = [&](const Affine& e) {
    Affine a = e;
    a.compact();
    std::vector<std::pair<int, double>> row;
    for (const auto& [i, coef] : a.terms()) row.push_back({i, coef * f.scale[i]});
    return std::make_pair(row, a.constant());
  };

  struct RawBlock {
    int dim;
    std::map<std::pair<int, int>, std::map<int, double>> acc;  // var -1: constant
  };
  std::vector<RawBlock> raw;

  for (const auto& con : p.constraints()) {
    if (con.kind != Constraint::Kind::lmi) {
      auto [row, k] = scaled_row(std::get<2>(con.entries.front()).re);
      double mx = 0.0;
      for (auto& t : row) mx = std::max(mx, std::abs(t.second));
      const double rs = mx > 0.0 ? 1.0 / mx : 1.0;
      if (con.kind == Constraint::Kind::zero) {
        const int r = static_cast<int>(b_vals.size());
        for (auto& [i, v] : row) a_trip.emplace_back(r, i, v * rs);
        b_vals.push_back(-k * rs);
      } else {
        const int r = static_cast<int>(h_lp.size());
        for (auto& [i, v] : row) lp_trip.emplace_back(r, i, -v * rs);
        h_lp.push_back(k * rs);
      }
      continue;
    }
    RawBlock rb;
    const int d = con.dim;
    rb.dim = con.hermitian ? 2 * d : d;
    for (const auto& [a, b, e] : con.entries) {
      Affine re = e.re, im = e.im;
      re.compact();
      im.compact();
      auto put = [&](int r, int c, const Affine& x, double sign) {
        add_entry(rb.acc, r, c, -1, sign * x.constant());
        for (const auto& [i, v] : x.terms()) add_entry(rb.acc, r, c, i, sign * v * f.scale[i]);
        if (r != c) {
          add_entry(rb.acc, c, r, -1, sign * x.constant());
          for (const auto& [i, v] : x.terms()) add_entry(rb.acc, c, r, i, sign * v * f.scale[i]);
        }
      };
      put(a, b, re, 1.0);
      if (con.hermitian) {
        put(a + d, b + d, re, 1.0);
        if (a != b) {
          put(a + d, b, im, 1.0);
          put(a, b + d, im, -1.0);
        }
      }
    }
    raw.push_back(std::move(rb));
  }

  f.m_lp = static_cast<int>(h_lp.size());
  f.m = f.m_lp;
  f.degree = f.m_lp;
  for (const auto& rb : raw) f.m += rb.dim * rb.dim, f.degree += rb.dim;

  f.A.resize(static_cast<int>(b_vals.size()), f.n);
  f.A.setFromTriplets(a_trip.begin(), a_trip.end());
  f.b = Eigen::Map<RVec>(b_vals.data(), static_cast<int>(b_vals.size()));
  f.G_lp.resize(f.m_lp, f.n);
  f.G_lp.setFromTriplets(lp_trip.begin(), lp_trip.end());

  f.h = RVec::Zero(f.m);
  f.h.head(f.m_lp) = Eigen::Map<RVec>(h_lp.data(), f.m_lp);
  std::vector<Triplet> g_trip(lp_trip);
  int offset = f.m_lp;
  for (auto& rb : raw) {
    PsdBlock blk;
    blk.dim = rb.dim;
    blk.offset = offset;
    const int D = rb.dim;
    // congruence equilibration from diagonal magnitudes
    RVec mag = RVec::Zero(D);
    for (const auto& [rc, coefs] : rb.acc)
      if (rc.first == rc.second)
        for (const auto& [i, v] : coefs) mag[rc.first] += std::abs(v);
    RVec dsc(D);
    for (int r = 0; r < D; ++r) dsc[r] = mag[r] > 0.0 ? 1.0 / std::sqrt(mag[r]) : 1.0;

    std::map<int, int> local;
    for (const auto& [rc, coefs] : rb.acc) {
      const auto [r, c] = rc;
      const double sc = dsc[r] * dsc[c];
      for (const auto& [i, v] : coefs) {
        if (i < 0) {
          f.h[offset + c * D + r] = v * sc;
          continue;
        }
        auto it = local.find(i);
        if (it == local.end()) {
          it = local.emplace(i, static_cast<int>(blk.vars.size())).first;
          blk.vars.push_back(i);
          blk.cols.emplace_back();
        }
        blk.cols[it->second].push_back({r, c, -v * sc});
        g_trip.emplace_back(offset + c * D + r, i, -v * sc);
      }
    }
    offset += D * D;
    f.blocks.push_back(std::move(blk));
  }
  f.G.resize(f.m, f.n);
  f.G.setFromTriplets(g_trip.begin(), g_trip.end());

  f.c = RVec::Zero(f.n);
  Affine obj = p.objective();
  obj.compact();
  for (const auto& [i, v] : obj.terms()) f.c[i] = v * f.scale[i];
  f.c_const = obj.constant();
  const double cm = f.c.cwiseAbs().maxCoeff();
  f.c_norm = cm > 0.0 ? cm : 1.0;
  f.c /= f.c_norm;
  return f;
}

// ---------------------------------------------------------------------------
// Cone-space helpers. A cone vector holds the LP part followed by each PSD
// block stored densely in column-major order.

struct Cone {
  const StandardForm& f;
  RVec d;  // LP scaling, W(z) = d .* z

  Eigen::Map<RMat> blk(RVec& v, const PsdBlock& b) const {
    return Eigen::Map<RMat>(v.data() + b.offset, b.dim, b.dim);
  }
  Eigen::Map<const RMat> blk(const RVec& v, const PsdBlock& b) const {
    return Eigen::Map<const RMat>(v.data() + b.offset, b.dim, b.dim);
  }

  RVec identity() const {
    RVec e = RVec::Zero(f.m);
    e.head(f.m_lp).setOnes();
    for (const auto& b : f.blocks)
      for (int r = 0; r < b.dim; ++r) e[b.offset + r * b.dim + r] = 1.0;
    return e;
  }

  /// W(z)
  RVec W(const RVec& z) const {
    RVec out(f.m);
    out.head(f.m_lp) = d.cwiseProduct(z.head(f.m_lp));
    for (const auto& b : f.blocks) blk(out, b) = b.R.transpose() * blk(z, b) * b.R;
    return out;
  }
  /// W^{-T}(s)
  RVec Winv_t(const RVec& s) const {
    RVec out(f.m);
    out.head(f.m_lp) = s.head(f.m_lp).cwiseQuotient(d);
    for (const auto& b : f.blocks) blk(out, b) = b.Q.transpose() * blk(s, b) * b.Q;
    return out;
  }
  /// W^T(x)
  RVec W_t(const RVec& x) const {
    RVec out(f.m);
    out.head(f.m_lp) = d.cwiseProduct(x.head(f.m_lp));
    for (const auto& b : f.blocks) blk(out, b) = b.R * blk(x, b) * b.R.transpose();
    return out;
  }
  /// W^{-1}(x)
  RVec W_inv(const RVec& x) const {
    RVec out(f.m);
    out.head(f.m_lp) = x.head(f.m_lp).cwiseQuotient(d);
    for (const auto& b : f.blocks) blk(out, b) = b.Q * blk(x, b) * b.Q.transpose();
    return out;
  }
  /// H(x) = W^T W (x)
  RVec H(const RVec& x) const { return W_t(W(x)); }
  /// H^{-1}(x) = W^{-1} W^{-T} (x)
  RVec H_inv(const RVec& x) const { return W_inv(Winv_t(x)); }
};

/// Largest step t with lambda + t*delta in the cone, given lambda diagonal per block.
double max_step(const StandardForm& f, const RVec& lam_lp, const RVec& delta) {
  double t = std::numeric_limits<double>::infinity();
  for (int i = 0; i < f.m_lp; ++i)
    if (delta[i] < 0.0) t = std::min(t, -lam_lp[i] / delta[i]);
  for (const auto& b : f.blocks) {
    Eigen::Map<const RMat> Dl(delta.data() + b.offset, b.dim, b.dim);
    const RVec is = b.lambda.cwiseSqrt().cwiseInverse();
    RMat T = is.asDiagonal() * Dl * is.asDiagonal();
    T = 0.5 * (T + T.transpose());
    Eigen::SelfAdjointEigenSolver<RMat> es(T, Eigen::EigenvaluesOnly);
    const double emin = es.eigenvalues().minCoeff();
    if (emin < 0.0) t = std::min(t, -1.0 / emin);
  }
  return t;
}

/// Jordan product x o y.
RVec jordan(const StandardForm& f, const RVec& x, const RVec& y) {
  RVec out(f.m);
  out.head(f.m_lp) = x.head(f.m_lp).cwiseProduct(y.head(f.m_lp));
  for (const auto& b : f.blocks) {
    Eigen::Map<const RMat> X(x.data() + b.offset, b.dim, b.dim);
    Eigen::Map<const RMat> Y(y.data() + b.offset, b.dim, b.dim);
    Eigen::Map<RMat> O(out.data() + b.offset, b.dim, b.dim);
    O = 0.5 * (X * Y + Y * X);
  }
  return out;
}

/// Solves lambda o u = v for diagonal lambda.
RVec lambda_solve(const StandardForm& f, const RVec& lam_lp, const RVec& v) {
  RVec out(f.m);
  out.head(f.m_lp) = v.head(f.m_lp).cwiseQuotient(lam_lp);
  for (const auto& b : f.blocks) {
    Eigen::Map<const RMat> V(v.data() + b.offset, b.dim, b.dim);
    Eigen::Map<RMat> O(out.data() + b.offset, b.dim, b.dim);
    for (int c = 0; c < b.dim; ++c)
      for (int r = 0; r < b.dim; ++r) O(r, c) = 2.0 * V(r, c) / (b.lambda[r] + b.lambda[c]);
  }
  return out;
}

/// lambda o lambda as a cone vector.
RVec lambda_sq(const StandardForm& f, const RVec& lam_lp) {
  RVec out = RVec::Zero(f.m);
  out.head(f.m_lp) = lam_lp.cwiseAbs2();
  for (const auto& b : f.blocks)
    for (int r = 0; r < b.dim; ++r) out[b.offset + r * b.dim + r] = b.lambda[r] * b.lambda[r];
  return out;
}

/// Most negative eigenvalue (as a positive number) of the cone vector, i.e. the
/// shift t such that v + t e is on the cone boundary.
double cone_violation(const StandardForm& f, const RVec& v) {
  double t = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < f.m_lp; ++i) t = std::max(t, -v[i]);
  for (const auto& b : f.blocks) {
    Eigen::Map<const RMat> X(v.data() + b.offset, b.dim, b.dim);
    RMat S = 0.5 * (X + X.transpose());
    Eigen::SelfAdjointEigenSolver<RMat> es(S, Eigen::EigenvaluesOnly);
    t = std::max(t, -es.eigenvalues().minCoeff());
  }
  return t;
}

/// Builds the scaling for the pair (s, z) in place of block data. For PSD
/// blocks the pair is given in the current scaled space and the new scaling is
/// composed with the existing R, Q. Returns false on a failed factorization.
bool rescale_block(PsdBlock& b, const RMat& s, const RMat& z, bool compose) {
  Eigen::LLT<RMat> ls(0.5 * (s + s.transpose()));
  Eigen::LLT<RMat> lz(0.5 * (z + z.transpose()));
  if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
  const RMat Ls = ls.matrixL();
  const RMat Lz = lz.matrixL();
  Eigen::JacobiSVD<RMat> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVec sv = svd.singularValues();
  if (!(sv.minCoeff() > 0.0)) return false;
  const RVec isq = sv.cwiseSqrt().cwiseInverse();
  const RMat Rt = Ls * svd.matrixV() * isq.asDiagonal();
  const RMat Qt = Lz * svd.matrixU() * isq.asDiagonal();
  if (compose) {
    b.R = b.R * Rt;
    b.Q = b.Q * Qt;
  } else {
    b.R = Rt;
    b.Q = Qt;
  }
  b.lambda = sv;
  return true;
}

class KktSolver {
 public:
  KktSolver(const StandardForm& f, const Cone& cone) : f_(f), cone_(cone) {}

  bool factor() {
    const int n = f_.n;
    RMat M = RMat::Zero(n, n);
    if (f_.m_lp > 0) {
      RVec inv_d = cone_.d.cwiseInverse();
      SpMat Gs = inv_d.asDiagonal() * f_.G_lp;
      M += RMat(SpMat(Gs.transpose() * Gs));
    }
    for (const auto& b : f_.blocks) {
      const int D = b.dim;
      const int p = static_cast<int>(b.vars.size());
      RMat Gh(D * D, p);
      for (int j = 0; j < p; ++j) {
        Eigen::Map<RMat> col(Gh.col(j).data(), D, D);
        col.setZero();
        for (const auto& e : b.cols[j]) col.noalias() += e.v * b.Q.row(e.r).transpose() * b.Q.row(e.c);
      }
      RMat Mb = Gh.transpose() * Gh;
      for (int j = 0; j < p; ++j)
        for (int i = 0; i < p; ++i) M(b.vars[i], b.vars[j]) += Mb(i, j);
    }
    has_eq_ = f_.A.rows() > 0;
    if (has_eq_) M += RMat(SpMat(f_.A.transpose() * f_.A));
    const double dmax = std::max(M.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    for (double reg : {0.0, 1e-14, 1e-11, 1e-8}) {
      RMat Mr = M;
      if (reg > 0.0) Mr.diagonal().array() += reg * dmax;
      // variables untouched by any constraint
      for (int i = 0; i < n; ++i)
        if (Mr(i, i) <= 0.0) Mr(i, i) = dmax > 0.0 ? dmax * 1e-8 : 1.0;
      llt_.compute(Mr);
      if (llt_.info() != Eigen::Success) continue;
      if (!has_eq_) return true;
      RMat AtD = RMat(f_.A.transpose());
      RMat KiAt = llt_.solve(AtD);
      RMat S = RMat(f_.A) * KiAt;
      S.diagonal().array() += 1e-14 * std::max(S.diagonal().maxCoeff(), 1e-300);
      schur_.compute(S);
      if (schur_.info() == Eigen::Success) return true;
    }
    return false;
  }

  /// Solves [0 A' G'; A 0 0; G 0 -H] [ux; uy; uz] = [bx; by; bz].
  void solve(const RVec& bx, const RVec& by, const RVec& bz, RVec& ux, RVec& uy, RVec& uz) const {
    raw_solve(bx, by, bz, ux, uy, uz);
    for (int it = 0; it < 2; ++it) {
      RVec ex = bx - f_.G.transpose() * uz;
      if (has_eq_) ex -= f_.A.transpose() * uy;
      RVec ey = has_eq_ ? RVec(by - f_.A * ux) : RVec(by);
      RVec ez = bz - (f_.G * ux - cone_.H(uz));
      RVec cx, cy, cz;
      raw_solve(ex, ey, ez, cx, cy, cz);
      ux += cx;
      uy += cy;
      uz += cz;
    }
  }

 private:
  void raw_solve(const RVec& bx, const RVec& by, const RVec& bz, RVec& ux, RVec& uy,
                 RVec& uz) const {
    RVec r1 = bx + f_.G.transpose() * cone_.H_inv(bz);
    if (has_eq_) {
      RVec rhs = r1 + f_.A.transpose() * by;
      RVec t = llt_.solve(rhs);
      uy = schur_.solve(f_.A * t - by);
      ux = llt_.solve(RVec(rhs - f_.A.transpose() * uy));
    } else {
      uy = RVec::Zero(0);
      ux = llt_.solve(r1);
    }
    uz = cone_.H_inv(f_.G * ux - bz);
  }

  const StandardForm& f_;
  const Cone& cone_;
  Eigen::LLT<RMat> llt_;
  Eigen::LLT<RMat> schur_;
  bool has_eq_ = false;
};

}  // namespace

ConicSolution solve(const ConicProblem& p, const SolverOptions& opts) {
  p.validate();
  StandardForm f = assemble(p);
  ConicSolution out;
  out.x = RVec::Zero(f.n);

  Cone cone{f, RVec::Ones(f.m_lp)};
  for (auto& b : f.blocks) {
    b.R = RMat::Identity(b.dim, b.dim);
    b.Q = RMat::Identity(b.dim, b.dim);
    b.lambda = RVec::Ones(b.dim);
  }
  const RVec e = cone.identity();
  const int neq = static_cast<int>(f.A.rows());

  auto finish = [&](const RVec& x, double tau, SolveStatus st) {
    out.status = st;
    out.x = f.scale.cwiseProduct(x) / tau;
    out.objective = p.objective().evaluate(out.x);
    return out;
  };

  // Starting point from the two least-squares problems with identity scaling.
  KktSolver kkt(f, cone);
  if (!kkt.factor()) return finish(RVec::Zero(f.n), 1.0, SolveStatus::numerical_failure);
  RVec x, y, z, s;
  kkt.solve(RVec::Zero(f.n), f.b, f.h, x, y, s);
  s = -s;
  {
    RVec dx, dy;
    kkt.solve(-f.c, RVec::Zero(neq), RVec::Zero(f.m), dx, y, z);
  }
  const double nrms = s.norm(), nrmz = z.norm();
  double ts = cone_violation(f, s), tz = cone_violation(f, z);
  if (ts >= -1e-8 * std::max(nrms, 1.0)) s += (1.0 + ts) * e;
  if (tz >= -1e-8 * std::max(nrmz, 1.0)) z += (1.0 + tz) * e;
  double tau = 1.0, kappa = 1.0;

  // initial scaling
  RVec lam_lp(f.m_lp);
  auto init_scaling = [&]() {
    for (int i = 0; i < f.m_lp; ++i) {
      cone.d[i] = std::sqrt(s[i] / z[i]);
      lam_lp[i] = std::sqrt(s[i] * z[i]);
    }
    for (auto& b : f.blocks) {
      Eigen::Map<const RMat> S(s.data() + b.offset, b.dim, b.dim);
      Eigen::Map<const RMat> Z(z.data() + b.offset, b.dim, b.dim);
      if (!rescale_block(b, S, Z, false)) return false;
    }
    return true;
  };
  if (!init_scaling()) return finish(x, tau, SolveStatus::numerical_failure);

  const double resx0 = std::max(1.0, f.c.norm());
  const double resy0 = std::max(1.0, f.b.norm());
  const double resz0 = std::max(1.0, f.h.norm());

  RVec best_x = x;
  double best_tau = tau;
  for (int iter = 0; iter <= opts.max_iterations; ++iter) {
    out.iterations = iter;
    const RVec hrx = -(f.G.transpose() * z) - (neq ? RVec(f.A.transpose() * y) : RVec::Zero(f.n));
    const RVec resx = hrx - f.c * tau;
    const RVec hry = neq ? RVec(f.A * x) : RVec::Zero(0);
    const RVec resy = hry - f.b * tau;
    const RVec hrz = s + f.G * x;
    const RVec resz = hrz - f.h * tau;
    const double cx = f.c.dot(x), by = neq ? f.b.dot(y) : 0.0, hz = f.h.dot(z);
    const double rt = kappa + cx + by + hz;
    const RVec lsq = lambda_sq(f, lam_lp);
    const double gap = lsq.dot(e);
    const double mu = (gap + tau * kappa) / (f.degree + 1);
    const double pcost = cx / tau, dcost = -(by + hz) / tau;
    const double ngap = gap / (tau * tau);
    const double relgap = ngap / std::max({std::abs(pcost), std::abs(dcost), 1e-300});
    const double pres = std::max(neq ? resy.norm() / resy0 : 0.0, resz.norm() / resz0) / tau;
    const double dres = resx.norm() / resx0 / tau;
    out.primal_residual = pres;
    out.dual_residual = dres;
    out.relative_gap = std::min(relgap, ngap);
    out.near_optimal = pres <= 100 * opts.feas_tol && dres <= 100 * opts.feas_tol &&
                       (relgap <= 100 * opts.gap_tol || ngap <= opts.gap_tol);
    if (opts.verbose)
      std::fprintf(stderr, "%3d % .8e % .8e %.2e %.2e %.2e %.2e\n", iter, pcost, dcost, ngap,
                   pres, dres, kappa / tau);
    best_x = x;
    best_tau = tau;

    if (pres <= opts.feas_tol && dres <= opts.feas_tol &&
        (relgap <= opts.gap_tol || ngap <= 1e-2 * opts.gap_tol))
      return finish(x, tau, SolveStatus::optimal);
    if (hz + by < 0.0) {
      const double pinfres = hrx.norm() / resx0 / (-(hz + by));
      if (pinfres <= opts.feas_tol) {
        out.near_optimal = false;
        return finish(x, tau, SolveStatus::infeasible);
      }
    }
    if (cx < 0.0) {
      const double dinfres =
          std::max(neq ? hry.norm() / resy0 : 0.0, hrz.norm() / resz0) / (-cx);
      if (dinfres <= opts.feas_tol) {
        // primal unbounded; none of the repo's problems can be
        out.near_optimal = false;
        return finish(x, tau, SolveStatus::numerical_failure);
      }
    }
    if (iter == opts.max_iterations) break;

    if (!kkt.factor()) return finish(best_x, best_tau, SolveStatus::numerical_failure);
    RVec x1, y1, z1;
    kkt.solve(-f.c, f.b, f.h, x1, y1, z1);
    const double den_base = f.c.dot(x1) + (neq ? f.b.dot(y1) : 0.0) + f.h.dot(z1);

    RVec dsa, dza;
    double dtau_a = 0.0, dkappa_a = 0.0, sigma = 0.0;
    RVec dx, dy, dz, ds_t, dz_t;
    double dtau = 0.0, dkappa = 0.0, step = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      RVec d_s;
      double d_k, eta;
      if (pass == 0) {
        d_s = -lsq;
        d_k = -tau * kappa;
        eta = 1.0;
      } else {
        d_s = -lsq - jordan(f, dsa, dza) + sigma * mu * e;
        d_k = -tau * kappa - dtau_a * dkappa_a + sigma * mu;
        eta = 1.0 - sigma;
      }
      const RVec ld = lambda_solve(f, lam_lp, d_s);
      RVec x0, y0, z0;
      kkt.solve(eta * resx, -eta * resy, -eta * resz - cone.W_t(ld), x0, y0, z0);
      const double num = eta * rt + d_k / tau + f.c.dot(x0) + (neq ? f.b.dot(y0) : 0.0) +
                         f.h.dot(z0);
      dtau = num / (kappa / tau - den_base);
      dx = x0 + dtau * x1;
      dy = y0 + dtau * y1;
      dz = z0 + dtau * z1;
      dkappa = (d_k - kappa * dtau) / tau;
      dz_t = cone.W(dz);
      ds_t = ld - dz_t;
      double amax = std::min(max_step(f, lam_lp, ds_t), max_step(f, lam_lp, dz_t));
      if (dtau < 0.0) amax = std::min(amax, -tau / dtau);
      if (dkappa < 0.0) amax = std::min(amax, -kappa / dkappa);
      if (pass == 0) {
        const double a = std::min(1.0, amax);
        sigma = std::pow(1.0 - a, 3);
        dsa = ds_t;
        dza = dz_t;
        dtau_a = dtau;
        dkappa_a = dkappa;
      } else {
        step = std::min(1.0, 0.99 * amax);
      }
    }
    if (!(step > 0.0) || !std::isfinite(step))
      return finish(best_x, best_tau, SolveStatus::numerical_failure);

    x += step * dx;
    if (neq) y += step * dy;
    tau += step * dtau;
    kappa += step * dkappa;
    // new scaled pair and composed scaling
    for (int i = 0; i < f.m_lp; ++i) {
      const double st = lam_lp[i] + step * ds_t[i];
      const double zt = lam_lp[i] + step * dz_t[i];
      cone.d[i] *= std::sqrt(st / zt);
      lam_lp[i] = std::sqrt(st * zt);
    }
    for (auto& b : f.blocks) {
      Eigen::Map<const RMat> Ds(ds_t.data() + b.offset, b.dim, b.dim);
      Eigen::Map<const RMat> Dz(dz_t.data() + b.offset, b.dim, b.dim);
      RMat st = RMat(b.lambda.asDiagonal()) + step * Ds;
      RMat zt = RMat(b.lambda.asDiagonal()) + step * Dz;
      if (!rescale_block(b, st, zt, true))
        return finish(best_x, best_tau, SolveStatus::numerical_failure);
    }
    // unscaled s = W^T(lambda), z = W^{-1}(lambda)
    RVec lam = RVec::Zero(f.m);
    lam.head(f.m_lp) = lam_lp;
    for (const auto& b : f.blocks)
      for (int r = 0; r < b.dim; ++r) lam[b.offset + r * b.dim + r] = b.lambda[r];
    s = cone.W_t(lam);
    z = cone.W_inv(lam);
    if (!x.allFinite() || !std::isfinite(tau))
      return finish(best_x, best_tau, SolveStatus::numerical_failure);
  }
  return finish(best_x, best_tau, SolveStatus::max_iterations);
}

}  // namespace twr::conic
