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

#include "twr/core/types.hpp"

#include <iosfwd>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace twr::conic {

/// Real affine expression: constant + sum coef * x[var].
class Affine {
 public:
  Affine() = default;
  Affine(double c) : constant_(c) {}  // NOLINT(google-explicit-constructor)
  static Affine var(int index, double coef = 1.0) {
    Affine a;
    a.terms_.push_back({index, coef});
    return a;
  }

  double constant() const { return constant_; }
  const std::vector<std::pair<int, double>>& terms() const { return terms_; }

  Affine& operator+=(const Affine& o);
  Affine& operator-=(const Affine& o);
  Affine& operator*=(double f);
  Affine& add_term(int index, double coef);

  /// Merges duplicate indices and drops exact zeros.
  void compact();

  double evaluate(const RVec& x) const;

 private:
  double constant_ = 0.0;
  std::vector<std::pair<int, double>> terms_;
};

inline Affine operator+(Affine a, const Affine& b) { return a += b; }
inline Affine operator-(Affine a, const Affine& b) { return a -= b; }
inline Affine operator-(Affine a) { return a *= -1.0; }
inline Affine operator*(double f, Affine a) { return a *= f; }
inline Affine operator*(Affine a, double f) { return a *= f; }

struct ComplexAffine {
  Affine re;
  Affine im;
  ComplexAffine() = default;
  ComplexAffine(Affine r) : re(std::move(r)) {}  // NOLINT(google-explicit-constructor)
  ComplexAffine(Affine r, Affine i) : re(std::move(r)), im(std::move(i)) {}
  ComplexAffine conj() const { return {re, -im}; }
};

inline ComplexAffine operator+(const ComplexAffine& a, const ComplexAffine& b) {
  return {a.re + b.re, a.im + b.im};
}
inline ComplexAffine operator-(const ComplexAffine& a, const ComplexAffine& b) {
  return {a.re - b.re, a.im - b.im};
}
ComplexAffine operator*(cplx f, const ComplexAffine& a);

struct Var {
  int index = -1;
  operator Affine() const { return Affine::var(index); }  // NOLINT(google-explicit-constructor)
};

/// Complex vector variable of length n, stored as n real parts then n imaginary parts.
struct CVecVar {
  int first = -1;
  int n = 0;
  ComplexAffine entry(int a) const {
    return {Affine::var(first + a), Affine::var(first + n + a)};
  }
  /// a^H x for constant a.
  ComplexAffine inner_from(const CVec& a) const;
  /// x^H a for constant a.
  ComplexAffine inner_to(const CVec& a) const { return inner_from(a).conj(); }
  CVec value(const RVec& x) const;
};

/// Hermitian d x d variable parameterized by d^2 reals: diagonal, then real
/// and imaginary parts of the strict upper triangle in row-major order.
struct HermVar {
  int first = -1;
  int d = 0;
  ComplexAffine entry(int a, int b) const;
  Affine trace() const;
  /// Tr(C X) for Hermitian constant C.
  Affine trace_with(const CMat& C) const;
  CMat value(const RVec& x) const;
  int params() const { return d * d; }
};

/// One constraint as the builder received it. For linear rows only entry (0,0)
/// is used. LMI entries are listed for the upper triangle (a <= b).
struct Constraint {
  enum class Kind { nonneg, zero, lmi };
  Kind kind = Kind::nonneg;
  int dim = 1;
  bool hermitian = false;
  std::string name;
  std::vector<std::tuple<int, int, ComplexAffine>> entries;
};

class ConicProblem {
 public:
  /// `scale` is the expected magnitude of the variable at the optimum; the
  /// solver works in x / scale.
  Var add_var(std::string name, double scale = 1.0);
  CVecVar add_cvec(std::string name, int n, double scale = 1.0);
  HermVar add_herm(std::string name, int d, bool psd, double scale = 1.0);

  void add_ge(const Affine& e, std::string name = {});  // e >= 0
  void add_le(const Affine& e, std::string name = {});  // e <= 0
  void add_eq(const Affine& e, std::string name = {});  // e == 0

  /// [[top, off], [off, bottom]] >= 0.
  void schur_lmi(const Affine& top, const Affine& off, const Affine& bottom,
                 std::string name = {});
  /// Real symmetric LMI; `entries` holds the upper triangle (a <= b).
  void add_lmi(int dim, std::vector<std::tuple<int, int, ComplexAffine>> entries,
               std::string name = {});
  /// Hermitian LMI, realized through the real embedding [[Re, -Im], [Im, Re]].
  void add_hermitian_lmi(int dim, std::vector<std::tuple<int, int, ComplexAffine>> entries,
                         std::string name = {});

  void minimize(const Affine& objective) { objective_ = objective; }

  int num_vars() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& var_names() const { return names_; }
  const std::vector<double>& var_scales() const { return scales_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Affine& objective() const { return objective_; }

  /// Sparse triplet dump, one line per nonzero:
  /// `constraint_id variable_id row col re im`. Variable id -1 is the constant
  /// term; constraint id -1 is the objective.
  void dump(std::ostream& os) const;

  /// Throws std::invalid_argument on dangling variable references.
  void validate() const;

 private:
  std::vector<std::string> names_;
  std::vector<double> scales_;
  std::vector<Constraint> constraints_;
  Affine objective_;
};

}  // namespace twr::conic
