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

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace twr {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

/// Smallest admissible rate target [bps/Hz]. Targets are clamped to
/// [kRateMin, 2] when drawn so that theta and alpha stay positive.
inline constexpr double kRateMin = 0.01;

/// Per-user storage for the 2K users of K pairs. User (i, k) with i in {0, 1}
/// lives at flat index 2k + i, i.e. the pair-partner index runs fastest.
template <class T>
class UserMap {
 public:
  UserMap() = default;
  explicit UserMap(int num_pairs, const T& init = T{})
      : num_pairs_(num_pairs), data_(2 * static_cast<size_t>(num_pairs), init) {}

  int pairs() const { return num_pairs_; }
  int size() const { return 2 * num_pairs_; }

  T& operator()(int i, int k) { return data_[flat(i, k)]; }
  const T& operator()(int i, int k) const { return data_[flat(i, k)]; }
  T& operator[](int u) { return data_[static_cast<size_t>(u)]; }
  const T& operator[](int u) const { return data_[static_cast<size_t>(u)]; }

  static int flat(int i, int k) { return 2 * k + i; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  bool operator==(const UserMap&) const = default;

 private:
  int num_pairs_ = 0;
  std::vector<T> data_;
};

/// One problem instance: relay with N antennas serving K user pairs.
/// All powers are linear watts.
struct Scenario {
  int N = 0;
  int K = 0;
  UserMap<CVec> h;  // uplink channels
  UserMap<CVec> g;  // downlink channels
  double sigma_r2 = 0.0;
  double sigma_u2 = 0.0;
  double sigma_z2 = 0.0;
  double eta = 0.0;
  double p_c = 0.0;
  UserMap<double> E;
  UserMap<double> rate;  // target rates Rbar [bps/Hz]
  UserMap<double> rho;   // large-scale fading

  /// Throws std::invalid_argument when shapes or parameter ranges are violated.
  void validate() const;

  bool operator==(const Scenario&) const = default;
};

/// Quantities derived once per scenario and shared read-only by all solvers.
struct DerivedCoefficients {
  UserMap<double> alpha;  // uplink SINR targets after power balancing
  UserMap<double> theta;  // downlink SINR targets, 2^{2 Rbar_{3-i,k}} - 1
  UserMap<CMat> Theta;    // g g^H
};

enum class SolveStatus { optimal, infeasible, max_iterations, numerical_failure };

std::string to_string(SolveStatus s);

/// Transmit covariance recovered from V_k.
struct RecoveredBeamformer {
  enum class Kind { rank_one, rank_two };
  Kind kind = Kind::rank_one;
  CVec v;          // rank one: unit-norm beamformer
  CMat F;          // rank two: N x 2, V = p F F^H
  double power = 0.0;
  double eig_ratio2 = 0.0;  // lambda_2 / lambda_1
  double eig_ratio3 = 0.0;  // lambda_3 / lambda_1
  bool alamouti() const { return kind == Kind::rank_two; }
};

struct DesignSolution {
  std::vector<CVec> w;   // receive beamformers, unit norm
  std::vector<CMat> V;   // transmit covariances
  std::vector<RecoveredBeamformer> recovered;
  UserMap<double> q;     // user transmit powers
  UserMap<double> beta;  // power splitting ratios
  UserMap<double> mu;
  double objective = 0.0;

  double relay_power() const;
  double user_power() const;
};

struct SolveReport {
  SolveStatus status = SolveStatus::numerical_failure;
  int iterations = 0;
  std::vector<double> objective_trace;  // watts
  std::vector<double> residual_trace;
  double max_residual = 0.0;
  double wall_ms = 0.0;
  std::string message;
};

}  // namespace twr
