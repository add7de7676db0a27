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


#include "twr/core/model.hpp"

#include <json.hpp>

#include <random>
#include <sstream>

namespace twr {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::max_iterations: return "max-iterations";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

double DesignSolution::relay_power() const {
  double p = 0.0;
  for (const auto& Vk : V) p += Vk.trace().real();
  return p;
}

double DesignSolution::user_power() const {
  double p = 0.0;
  for (double x : q) p += x;
  return p;
}

void Scenario::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("scenario: " + m); };
  if (N <= 0 || K <= 0) fail("N and K must be positive");
  auto check_map = [&](auto const& m, const char* name) {
    if (m.pairs() != K) fail(std::string(name) + " has wrong shape");
  };
  check_map(h, "h");
  check_map(g, "g");
  check_map(E, "E");
  check_map(rate, "Rbar");
  check_map(rho, "rho");
  for (int u = 0; u < 2 * K; ++u) {
    if (h[u].size() != N || g[u].size() != N) fail("channel length differs from N");
    if (!(E[u] > 0.0)) fail("E must be positive");
    if (!(rate[u] >= kRateMin)) fail("Rbar below minimum rate");
  }
  if (!(sigma_r2 > 0.0 && sigma_u2 > 0.0 && sigma_z2 > 0.0)) fail("noise powers must be positive");
  if (!(eta > 0.0 && eta < 1.0)) fail("eta must lie in (0,1)");
  if (!(p_c > 0.0)) fail("p_c must be positive");
}

double linear_from_dbm(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double dbm_from_linear(double watts) { return 10.0 * std::log10(watts) + 30.0; }

DerivedCoefficients derive_coefficients(const Scenario& s) {
  DerivedCoefficients c;
  c.alpha = UserMap<double>(s.K);
  c.theta = UserMap<double>(s.K);
  c.Theta = UserMap<CMat>(s.K);
  for (int k = 0; k < s.K; ++k) {
    if (s.rate(0, k) < kRateMin || s.rate(1, k) < kRateMin)
      throw std::invalid_argument("derive_coefficients: Rbar below minimum rate");
    const double t1 = rate_power(s.rate(0, k));
    const double t2 = rate_power(s.rate(1, k));
    c.alpha(0, k) = t1 - t1 / (t1 + t2);
    c.alpha(1, k) = t2 - t2 / (t1 + t2);
    c.theta(0, k) = t2 - 1.0;
    c.theta(1, k) = t1 - 1.0;
    for (int i = 0; i < 2; ++i) c.Theta(i, k) = s.g(i, k) * s.g(i, k).adjoint();
  }
  return c;
}

namespace {

double gain(const CVec& w, const CVec& h) { return std::norm(w.dot(h)); }

double uplink_interference(const Scenario& s, const UserMap<double>& q,
                           const std::vector<CVec>& w, int k) {
  double acc = 0.0;
  for (int l = 0; l < s.K; ++l) {
    if (l == k) continue;
    for (int j = 0; j < 2; ++j) acc += q(j, l) * gain(w[k], s.h(j, l));
  }
  return acc;
}

}  // namespace

double uplink_sinr(const Scenario& s, const UserMap<double>& q, const std::vector<CVec>& w,
                   int i, int k) {
  return q(i, k) * gain(w[k], s.h(i, k)) / (uplink_interference(s, q, w, k) + s.sigma_r2);
}

double uplink_rate(const Scenario& s, const UserMap<double>& q, const std::vector<CVec>& w,
                   int i, int k) {
  const double own = q(i, k) * gain(w[k], s.h(i, k));
  const double pair = q(0, k) * gain(w[k], s.h(0, k)) + q(1, k) * gain(w[k], s.h(1, k));
  if (!(pair > 0.0)) return 0.0;
  const double arg = own / pair + uplink_sinr(s, q, w, i, k);
  if (arg <= 1.0) return 0.0;
  return 0.5 * std::log2(arg);
}

namespace {

double theta_trace(const CVec& g, const CMat& V) { return (g.adjoint() * V * g)(0, 0).real(); }

DownlinkEval downlink_from_terms(const Scenario& s, double signal, double interference,
                                 double beta) {
  DownlinkEval e;
  e.sinr = beta * signal / (beta * interference + beta * s.sigma_u2 + s.sigma_z2);
  e.rate = 0.5 * std::log2(1.0 + e.sinr);
  return e;
}

}  // namespace

DownlinkEval downlink_sinr_rate(const Scenario& s, const std::vector<CMat>& V,
                                const UserMap<double>& beta, int i, int k) {
  const CVec& g = s.g(i, k);
  double interference = 0.0;
  for (int l = 0; l < s.K; ++l)
    if (l != k) interference += theta_trace(g, V[l]);
  return downlink_from_terms(s, theta_trace(g, V[k]), interference, beta(i, k));
}

DownlinkEval downlink_sinr_rate(const Scenario& s, const std::vector<double>& p,
                                const std::vector<CVec>& v, const UserMap<double>& beta, int i,
                                int k) {
  const CVec& g = s.g(i, k);
  double interference = 0.0;
  for (int l = 0; l < s.K; ++l)
    if (l != k) interference += p[l] * gain(g, v[l]);
  return downlink_from_terms(s, p[k] * gain(g, v[k]), interference, beta(i, k));
}

double received_power(const Scenario& s, const std::vector<CMat>& V, int i, int k) {
  double acc = s.sigma_u2;
  for (const auto& Vl : V) acc += theta_trace(s.g(i, k), Vl);
  return acc;
}

double harvested_power(const Scenario& s, const std::vector<CMat>& V,
                       const UserMap<double>& beta, int i, int k) {
  return s.eta * (1.0 - beta(i, k)) * received_power(s, V, i, k);
}

double pathloss(double distance_m, const ScenarioParams& params) {
  return params.rho0 * std::pow(distance_m, -params.pathloss_exp);
}

Scenario generate_scenario(std::uint64_t seed, int N, int K, const ScenarioParams& params) {
  if (N <= 0 || K <= 0) throw std::invalid_argument("generate_scenario: N and K must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };

  Scenario s;
  s.N = N;
  s.K = K;
  s.h = UserMap<CVec>(K);
  s.g = UserMap<CVec>(K);
  s.E = UserMap<double>(K);
  s.rate = UserMap<double>(K);
  s.rho = UserMap<double>(K);
  s.sigma_r2 = s.sigma_u2 = s.sigma_z2 = linear_from_dbm(params.noise_dbm);
  s.eta = params.eta;
  s.p_c = linear_from_dbm(params.p_c_dbm);

  auto draw_channel = [&](double rho) {
    CVec v(N);
    const double sd = std::sqrt(rho / 2.0);
    for (int n = 0; n < N; ++n) {
      const double re = normal(rng);
      const double im = normal(rng);
      v[n] = cplx(sd * re, sd * im);
    }
    return v;
  };

  for (int u = 0; u < 2 * K; ++u) {
    s.rho[u] = pathloss(uniform(params.d_min, params.d_max), params);
    s.h[u] = draw_channel(s.rho[u]);
    s.g[u] = draw_channel(s.rho[u]);
    s.E[u] = linear_from_dbm(uniform(params.E_min_dbm, params.E_max_dbm));
    const double r = uniform(params.rate_min, params.rate_max);
    s.rate[u] = params.fixed_rate > 0.0 ? params.fixed_rate : std::max(r, kRateMin);
  }
  return s;
}

namespace {

using nlohmann::json;

json vec_to_json(const CVec& v) {
  json a = json::array();
  for (int n = 0; n < v.size(); ++n) a.push_back({v[n].real(), v[n].imag()});
  return a;
}

json channels_to_json(const UserMap<CVec>& m) {
  json out = json::array();
  for (int i = 0; i < 2; ++i) {
    json row = json::array();
    for (int k = 0; k < m.pairs(); ++k) row.push_back(vec_to_json(m(i, k)));
    out.push_back(row);
  }
  return out;
}

json scalars_to_json(const UserMap<double>& m) {
  json out = json::array();
  for (int i = 0; i < 2; ++i) {
    json row = json::array();
    for (int k = 0; k < m.pairs(); ++k) row.push_back(m(i, k));
    out.push_back(row);
  }
  return out;
}

UserMap<double> scalars_from_json(const json& j, int K) {
  UserMap<double> m(K);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < K; ++k) m(i, k) = j.at(i).at(k).get<double>();
  return m;
}

UserMap<CVec> channels_from_json(const json& j, int N, int K) {
  UserMap<CVec> m(K);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < K; ++k) {
      const json& a = j.at(i).at(k);
      if (static_cast<int>(a.size()) != N)
        throw std::invalid_argument("scenario json: channel length differs from N");
      CVec v(N);
      for (int n = 0; n < N; ++n) v[n] = cplx(a.at(n).at(0).get<double>(), a.at(n).at(1).get<double>());
      m(i, k) = v;
    }
  return m;
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["units"] = "linear";
  j["N"] = s.N;
  j["K"] = s.K;
  j["sigma_r2"] = s.sigma_r2;
  j["sigma_u2"] = s.sigma_u2;
  j["sigma_z2"] = s.sigma_z2;
  j["eta"] = s.eta;
  j["p_c"] = s.p_c;
  j["E"] = scalars_to_json(s.E);
  j["Rbar"] = scalars_to_json(s.rate);
  j["rho"] = scalars_to_json(s.rho);
  j["h"] = channels_to_json(s.h);
  j["g"] = channels_to_json(s.g);
  return j.dump(1);
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario json: ") + e.what());
  }
  if (j.value("units", std::string()) != "linear")
    throw std::invalid_argument("scenario json: units must be \"linear\"");
  Scenario s;
  try {
    s.N = j.at("N").get<int>();
    s.K = j.at("K").get<int>();
    s.sigma_r2 = j.at("sigma_r2").get<double>();
    s.sigma_u2 = j.at("sigma_u2").get<double>();
    s.sigma_z2 = j.at("sigma_z2").get<double>();
    s.eta = j.at("eta").get<double>();
    s.p_c = j.at("p_c").get<double>();
    s.E = scalars_from_json(j.at("E"), s.K);
    s.rate = scalars_from_json(j.at("Rbar"), s.K);
    s.rho = scalars_from_json(j.at("rho"), s.K);
    s.h = channels_from_json(j.at("h"), s.N, s.K);
    s.g = channels_from_json(j.at("g"), s.N, s.K);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario json: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace twr
