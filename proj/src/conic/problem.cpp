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


#include "twr/conic/problem.hpp"

#include <algorithm>
#include <ostream>
#include <limits>
#include <stdexcept>

namespace twr::conic {

Affine& Affine::operator+=(const Affine& o) {
  constant_ += o.constant_;
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  return *this;
}

Affine& Affine::operator-=(const Affine& o) {
  constant_ -= o.constant_;
  for (const auto& [i, c] : o.terms_) terms_.push_back({i, -c});
  return *this;
}

Affine& Affine::operator*=(double f) {
  constant_ *= f;
  for (auto& t : terms_) t.second *= f;
  return *this;
}

Affine& Affine::add_term(int index, double coef) {
  terms_.push_back({index, coef});
  return *this;
}

void Affine::compact() {
  std::sort(terms_.begin(), terms_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, double>> out;
  for (const auto& t : terms_) {
    if (!out.empty() && out.back().first == t.first)
      out.back().second += t.second;
    else
      out.push_back(t);
  }
  std::erase_if(out, [](const auto& t) { return t.second == 0.0; });
  terms_ = std::move(out);
}

double Affine::evaluate(const RVec& x) const {
  double v = constant_;
  for (const auto& [i, c] : terms_) v += c * x[i];
  return v;
}

ComplexAffine operator*(cplx f, const ComplexAffine& a) {
  return {f.real() * a.re - f.imag() * a.im, f.real() * a.im + f.imag() * a.re};
}

ComplexAffine CVecVar::inner_from(const CVec& a) const {
  // sum conj(a_n) x_n with x_n = xr + j xi
  ComplexAffine out;
  for (int k = 0; k < n; ++k) {
    const double ar = a[k].real(), ai = a[k].imag();
    out.re.add_term(first + k, ar).add_term(first + n + k, ai);
    out.im.add_term(first + k, -ai).add_term(first + n + k, ar);
  }
  return out;
}

CVec CVecVar::value(const RVec& x) const {
  CVec v(n);
  for (int k = 0; k < n; ++k) v[k] = cplx(x[first + k], x[first + n + k]);
  return v;
}

namespace {

// Offset of the real part of upper entry (a, b), a < b, after the diagonal.
int upper_offset(int d, int a, int b) { return a * d - a * (a + 1) / 2 + (b - a - 1); }

}  // namespace

ComplexAffine HermVar::entry(int a, int b) const {
  if (a == b) return {Affine::var(first + a), Affine()};
  const int npairs = d * (d - 1) / 2;
  const bool swapped = a > b;
  if (swapped) std::swap(a, b);
  const int off = upper_offset(d, a, b);
  Affine re = Affine::var(first + d + off);
  Affine im = Affine::var(first + d + npairs + off, swapped ? -1.0 : 1.0);
  return {re, im};
}

Affine HermVar::trace() const {
  Affine t;
  for (int a = 0; a < d; ++a) t.add_term(first + a, 1.0);
  return t;
}

Affine HermVar::trace_with(const CMat& C) const {
  const int npairs = d * (d - 1) / 2;
  Affine t;
  for (int a = 0; a < d; ++a) t.add_term(first + a, C(a, a).real());
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      const int off = upper_offset(d, a, b);
      t.add_term(first + d + off, 2.0 * C(a, b).real());
      t.add_term(first + d + npairs + off, 2.0 * C(a, b).imag());
    }
  return t;
}

CMat HermVar::value(const RVec& x) const {
  CMat X(d, d);
  const int npairs = d * (d - 1) / 2;
  for (int a = 0; a < d; ++a) X(a, a) = x[first + a];
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      const int off = upper_offset(d, a, b);
      X(a, b) = cplx(x[first + d + off], x[first + d + npairs + off]);
      X(b, a) = std::conj(X(a, b));
    }
  return X;
}

Var ConicProblem::add_var(std::string name, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("add_var: scale must be positive");
  names_.push_back(std::move(name));
  scales_.push_back(scale);
  return Var{num_vars() - 1};
}

CVecVar ConicProblem::add_cvec(std::string name, int n, double scale) {
  CVecVar v{num_vars(), n};
  for (int k = 0; k < n; ++k) add_var(name + ".re" + std::to_string(k), scale);
  for (int k = 0; k < n; ++k) add_var(name + ".im" + std::to_string(k), scale);
  return v;
}

HermVar ConicProblem::add_herm(std::string name, int d, bool psd, double scale) {
  HermVar X{num_vars(), d};
  for (int k = 0; k < d * d; ++k) add_var(name + "[" + std::to_string(k) + "]", scale);
  if (psd) {
    std::vector<std::tuple<int, int, ComplexAffine>> entries;
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) entries.emplace_back(a, b, X.entry(a, b));
    add_hermitian_lmi(d, std::move(entries), name + ">=0");
  }
  return X;
}

void ConicProblem::add_ge(const Affine& e, std::string name) {
  Constraint c;
  c.kind = Constraint::Kind::nonneg;
  c.name = std::move(name);
  c.entries.emplace_back(0, 0, ComplexAffine(e));
  constraints_.push_back(std::move(c));
}

void ConicProblem::add_le(const Affine& e, std::string name) { add_ge(-e, std::move(name)); }

void ConicProblem::add_eq(const Affine& e, std::string name) {
  Constraint c;
  c.kind = Constraint::Kind::zero;
  c.name = std::move(name);
  c.entries.emplace_back(0, 0, ComplexAffine(e));
  constraints_.push_back(std::move(c));
}

void ConicProblem::schur_lmi(const Affine& top, const Affine& off, const Affine& bottom,
                             std::string name) {
  add_lmi(2, {{0, 0, top}, {0, 1, off}, {1, 1, bottom}}, std::move(name));
}

namespace {

void check_upper(int dim, const std::vector<std::tuple<int, int, ComplexAffine>>& entries) {
  if (dim <= 0) throw std::invalid_argument("lmi: dimension must be positive");
  for (const auto& [a, b, e] : entries)
    if (a < 0 || b < a || b >= dim) throw std::invalid_argument("lmi: entry outside upper triangle");
}

}  // namespace

void ConicProblem::add_lmi(int dim, std::vector<std::tuple<int, int, ComplexAffine>> entries,
                           std::string name) {
  check_upper(dim, entries);
  for (const auto& [a, b, e] : entries)
    if (!e.im.terms().empty() || e.im.constant() != 0.0)
      throw std::invalid_argument("add_lmi: complex entry in a real LMI");
  Constraint c;
  c.kind = Constraint::Kind::lmi;
  c.dim = dim;
  c.name = std::move(name);
  c.entries = std::move(entries);
  constraints_.push_back(std::move(c));
}

void ConicProblem::add_hermitian_lmi(int dim,
                                     std::vector<std::tuple<int, int, ComplexAffine>> entries,
                                     std::string name) {
  check_upper(dim, entries);
  for (const auto& [a, b, e] : entries)
    if (a == b && (!e.im.terms().empty() || e.im.constant() != 0.0))
      throw std::invalid_argument("add_hermitian_lmi: diagonal entry must be real");
  Constraint c;
  c.kind = Constraint::Kind::lmi;
  c.dim = dim;
  c.hermitian = true;
  c.name = std::move(name);
  c.entries = std::move(entries);
  constraints_.push_back(std::move(c));
}

void ConicProblem::validate() const {
  const int n = num_vars();
  auto check = [n](const Affine& e) {
    for (const auto& [i, c] : e.terms())
      if (i < 0 || i >= n) throw std::invalid_argument("conic problem: unknown variable");
  };
  check(objective_);
  for (const auto& c : constraints_)
    for (const auto& [a, b, e] : c.entries) {
      check(e.re);
      check(e.im);
    }
}

void ConicProblem::dump(std::ostream& os) const {
  auto emit = [&os](int cid, int row, int col, const ComplexAffine& e) {
    Affine re = e.re, im = e.im;
    re.compact();
    im.compact();
    if (re.constant() != 0.0 || im.constant() != 0.0)
      os << cid << ' ' << -1 << ' ' << row << ' ' << col << ' ' << re.constant() << ' '
         << im.constant() << '\n';
    // merge real and imaginary coefficients of the same variable
    size_t p = 0, q = 0;
    const auto& rt = re.terms();
    const auto& it = im.terms();
    while (p < rt.size() || q < it.size()) {
      int vr = p < rt.size() ? rt[p].first : std::numeric_limits<int>::max();
      int vi = q < it.size() ? it[q].first : std::numeric_limits<int>::max();
      int v = std::min(vr, vi);
      double cr = vr == v ? rt[p++].second : 0.0;
      double ci = vi == v ? it[q++].second : 0.0;
      os << cid << ' ' << v << ' ' << row << ' ' << col << ' ' << cr << ' ' << ci << '\n';
    }
  };
  os.precision(17);
  os << "# constraint_id variable_id row col re im\n";
  emit(-1, 0, 0, ComplexAffine(objective_));
  for (size_t c = 0; c < constraints_.size(); ++c)
    for (const auto& [a, b, e] : constraints_[c].entries) emit(static_cast<int>(c), a, b, e);
}

}  // namespace twr::conic
