#pragma once

// Shared fixtures and independent oracles for the test binaries.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mobility/records.hpp"
#include "mobility/rng.hpp"
#include "mobility/simulator.hpp"
#include "mobility/types.hpp"

namespace fixture {

using mobility::Matrix3;

#ifndef MOBILITY_FIXTURE_DIR
#define MOBILITY_FIXTURE_DIR "fixtures"
#endif

inline std::string path(const std::string& name) { return std::string(MOBILITY_FIXTURE_DIR) + "/" + name; }

inline const std::array<std::string, 3> kLabels{"I", "II", "III"};

// Father x child counts whose row totals, column totals and row proportions
// agree with the published cohort tables.
inline const std::array<Matrix3, 3> kCounts{{
    {{{929, 792, 173}, {361, 981, 297}, {17, 74, 121}}},
    {{{2313, 1820, 315}, {739, 2045, 572}, {52, 255, 214}}},
    {{{1044, 605, 87}, {374, 796, 157}, {33, 141, 82}}},
}};

inline mobility::TransitionCounts counts(std::size_t cohort) { return mobility::TransitionCounts(kCounts[cohort]); }

// Published matrices, two decimals.
inline const std::array<Matrix3, 3> kPublishedP{{
    {{{0.49, 0.42, 0.09}, {0.22, 0.60, 0.18}, {0.08, 0.35, 0.57}}},
    {{{0.52, 0.41, 0.07}, {0.22, 0.61, 0.17}, {0.10, 0.49, 0.41}}},
    {{{0.60, 0.35, 0.05}, {0.28, 0.60, 0.12}, {0.13, 0.55, 0.32}}},
}};
inline const std::array<Matrix3, 3> kPublishedR{{
    {{{0.74, 0.15, 0.10}, {0, 0.95, 0.05}, {0.01, 0.01, 0.99}}},
    {{{0.72, 0.19, 0.09}, {0, 0.97, 0.03}, {0.01, 0.01, 0.98}}},
    {{{0.84, 0.12, 0.04}, {0, 1, 0}, {0, 0, 1}}},
}};
inline const std::array<Matrix3, 3> kPublishedQ{{
    {{{0.67, 0.33, 0}, {0.29, 0.59, 0.12}, {0.10, 0.35, 0.55}}},
    {{{0.72, 0.28, 0}, {0.31, 0.56, 0.13}, {0.14, 0.47, 0.39}}},
    {{{0.72, 0.26, 0.02}, {0.33, 0.56, 0.11}, {0.15, 0.53, 0.31}}},
}};

// (i_obs, i_os, i_true)
inline const std::array<std::array<double, 3>, 3> kPublishedIndexes{{
    {0.45, 1.11, 0.40},
    {0.49, 1.10, 0.44},
    {0.49, 1.05, 0.47},
}};

// lambda_M, lambda_U, theta_max, theta_min, theta_M_max, theta_M_min (column order of the source table)
inline const std::array<std::array<double, 6>, 3> kPublishedParams{{
    {0.44, 0.66, 0.66, 0.38, 0.71, 0.33},
    {0.58, 0.81, 0.81, 0.52, 0.86, 0.46},
    {0.64, 0.87, 0.89, 0.58, 0.91, 0.51},
}};
// (i_opp, i_loi)
inline const std::array<std::array<double, 2>, 3> kPublishedOppLoi{{{0.55, 0.15}, {0.57, 0.12}, {0.57, 0.10}}};

inline mobility::ModelParams published_params(std::size_t cohort) {
  const auto& p = kPublishedParams[cohort];
  return {p[0], p[1], p[2], p[3], p[5], p[4]};
}

inline double max_abs_diff(const Matrix3& a, const Matrix3& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
  return worst;
}

// Parameters satisfying every model assumption with strictly positive
// diagonal entries, so identification is well posed.
inline mobility::ModelParams random_valid_params(mobility::Rng& rng) {
  mobility::ModelParams p;
  p.lambda_M = rng.uniform(0.05, 0.9);
  p.lambda_U = rng.uniform(p.lambda_M + 0.02, 0.98);
  p.theta_max = rng.uniform(p.lambda_U, 1.0);
  p.theta_M_max = rng.uniform(p.lambda_U, 1.0);
  p.theta_min = rng.uniform(0.0, p.lambda_M);
  p.theta_M_min = rng.uniform(0.0, p.lambda_M);
  return p;
}

// Brute-force LP oracle: max c.x s.t. A x = b, x >= 0, by enumerating every
// basis of the row-reduced system. Returns nullopt when infeasible.
struct VertexResult {
  double objective;
  std::vector<double> x;
};

inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> m, std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    if (std::abs(m[piv][c]) < 1e-11) return std::nullopt;
    std::swap(m[piv], m[c]);
    std::swap(rhs[piv], rhs[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) rhs[i] /= m[i][i];
  return rhs;
}

inline std::optional<VertexResult> enumerate_vertices(const std::vector<double>& c,
                                                      const std::vector<std::vector<double>>& a,
                                                      const std::vector<double>& b) {
  const std::size_t n = c.size();
  // Row-reduce [A|b] and keep independent rows.
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto r = a[i];
    r.push_back(b[i]);
    rows.push_back(r);
  }
  std::vector<std::vector<double>> basis_rows;
  for (auto r : rows) {
    for (const auto& q : basis_rows) {
      std::size_t lead = 0;
      while (lead < n && std::abs(q[lead]) < 1e-12) ++lead;
      const double f = r[lead] / q[lead];
      for (std::size_t k = 0; k <= n; ++k) r[k] -= f * q[k];
    }
    std::size_t lead = 0;
    while (lead < n && std::abs(r[lead]) < 1e-10) ++lead;
    if (lead == n) {
      if (std::abs(r[n]) > 1e-9) return std::nullopt;
      continue;
    }
    basis_rows.push_back(r);
  }
  const std::size_t m = basis_rows.size();

  std::optional<VertexResult> best;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(m), true);
  do {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < n; ++j)
      if (pick[j]) cols.push_back(j);
    std::vector<std::vector<double>> sq(m, std::vector<double>(m));
    std::vector<double> rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < m; ++k) sq[i][k] = basis_rows[i][cols[k]];
      rhs[i] = basis_rows[i][n];
    }
    auto xs = solve_square(sq, rhs);
    if (!xs) continue;
    if (std::any_of(xs->begin(), xs->end(), [](double v) { return v < -1e-10; })) continue;
    std::vector<double> x(n, 0.0);
    double obj = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      x[cols[k]] = std::max(0.0, (*xs)[k]);
      obj += c[cols[k]] * x[cols[k]];
    }
    if (!best || obj > best->objective) best = VertexResult{obj, x};
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

// Maximum trace of a row-stochastic R with R^T f = c, by enumeration.
inline std::optional<double> max_trace_oracle(const mobility::Vector3& f, const mobility::Vector3& c) {
  std::vector<double> obj(9, 0.0);
  obj[0] = obj[4] = obj[8] = 1.0;
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<double> row(9, 0.0);
    for (std::size_t i = 0; i < 3; ++i) row[3 * i + j] = f[i];
    a.push_back(row);
    b.push_back(c[j]);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<double> row(9, 0.0);
    for (std::size_t j = 0; j < 3; ++j) row[3 * i + j] = 1.0;
    a.push_back(row);
    b.push_back(1.0);
  }
  auto r = enumerate_vertices(obj, a, b);
  if (!r) return std::nullopt;
  return r->objective;
}

// Income panel whose log-income moments match the oldest cohort's published
// premia: mean ratios 1.055 and 1.049, variance ratios 0.480 and 1.105.
// Endowments are fixed at 1/2 so that 2 theta mu = mu.
struct PanelTarget {
  double mean_ratio_MW = 1.055;
  double mean_ratio_UM = 1.049;
  double var_ratio_MW = 0.480;
  double var_ratio_UM = 1.105;
};

inline const std::array<int, 9> kWaves{1995, 1998, 2000, 2002, 2004, 2006, 2008, 2010, 2012};

inline std::vector<mobility::IncomeRecord> income_panel(std::size_t per_class, std::uint64_t seed,
                                                        const PanelTarget& t = {}, int birth_year = 1945) {
  mobility::Primitives p;
  p.mu_W = 6.0;
  p.mu_M = p.mu_W * t.mean_ratio_MW;
  p.mu_U = p.mu_M * t.mean_ratio_UM;
  p.sigma2_W = 1.0;
  p.sigma2_M = p.sigma2_W * t.var_ratio_MW;
  p.sigma2_U = p.sigma2_M * t.var_ratio_UM;
  std::vector<mobility::IncomeRecord> out;
  for (std::size_t w = 0; w < kWaves.size(); ++w) {
    std::vector<mobility::sim::Agent> agents;
    for (auto cls : mobility::kAllClasses)
      for (std::size_t k = 0; k < per_class; ++k) agents.push_back({cls, 0.5, cls, std::nullopt});
    auto recs = mobility::sim::simulate_incomes(p, agents, {kWaves[w], birth_year}, mobility::substream_seed(seed, w));
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return out;
}

}  // namespace fixture
