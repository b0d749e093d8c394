#include "mobility/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <thread>

#include "mobility/data_io.hpp"
#include "mobility/lp.hpp"
#include "mobility/matrix3.hpp"
#include "mobility/rng.hpp"

namespace mobility::estimation {

TransitionMatrix estimate_P(const TransitionCounts& counts) {
  Matrix3 p{};
  for (std::size_t i = 0; i < kClassCount; ++i) {
    const double total = counts.row_total(i);
    if (!(total > 0.0))
      throw Error(ErrorKind::empty_parent_class,
                  "no transitions from parent class " + std::string(class_name(class_at(i))));
    for (std::size_t j = 0; j < kClassCount; ++j) p[i][j] = counts(i, j) / total;
  }
  return TransitionMatrix::normalized(p, 1e-12);
}

MarginalShares shares_from_counts(const TransitionCounts& counts) {
  const double total = counts.total();
  if (!(total > 0.0)) throw Error(ErrorKind::data, "transition counts are all zero");
  Vector3 rows{}, cols{};
  for (std::size_t i = 0; i < kClassCount; ++i) {
    rows[i] = counts.row_total(i);
    cols[i] = counts.column_total(i);
  }
  return {ClassShares::from_weights(rows), ClassShares::from_weights(cols)};
}

TransitionMatrix solve_R(const ClassShares& fathers, const ClassShares& children) {
  for (std::size_t i = 0; i < kClassCount; ++i) {
    if (!(fathers[i] > 0.0))
      throw Error(ErrorKind::empty_parent_class,
                  "father share of class " + std::string(class_name(class_at(i))) +
                      " is zero; merge it with a neighbouring class");
  }

  // Variable 3*i + j is r_ij.
  lp::LinearProgram prog;
  prog.var_count = 9;
  prog.objective.assign(9, 0.0);
  for (std::size_t i = 0; i < kClassCount; ++i) prog.objective[4 * i] = -1.0;
  for (std::size_t j = 0; j < kClassCount; ++j) {
    std::vector<double> row(9, 0.0);
    for (std::size_t i = 0; i < kClassCount; ++i) row[3 * i + j] = fathers[i];
    prog.add_equality(row, children[j]);
  }
  for (std::size_t i = 0; i < kClassCount; ++i) {
    std::vector<double> row(9, 0.0);
    for (std::size_t j = 0; j < kClassCount; ++j) row[3 * i + j] = 1.0;
    prog.add_equality(row, 1.0);
  }

  const auto sol = lp::solve_lp(prog);
  if (sol.status != lp::LpStatus::optimal)
    throw Error(ErrorKind::infeasible,
                "structural mobility program is " + std::string(lp::status_name(sol.status)));
  Matrix3 r{};
  for (std::size_t i = 0; i < kClassCount; ++i)
    for (std::size_t j = 0; j < kClassCount; ++j) r[i][j] = sol.x[3 * i + j];
  return TransitionMatrix::normalized(r, 1e-8);
}

namespace {

Matrix3 checked_inverse(const Matrix3& m, const char* what) {
  auto inv = mat3::inverse(m);
  if (!inv) throw Error(ErrorKind::decomposition_failed, std::string(what) + " is singular");
  return *inv;
}

Matrix3 checked_clip(const Matrix3& m, const char* what) {
  auto out = mat3::clip_and_normalize_rows(m);
  if (!out) throw Error(ErrorKind::decomposition_failed, std::string(what) + " has a row with no positive mass");
  return *out;
}

}  // namespace

Amendment amend_decomposition(const TransitionMatrix& P, const TransitionMatrix& R0) {
  const Matrix3& p = P.entries();
  Matrix3 q = mat3::multiply(p, checked_inverse(R0.entries(), "R0"));
  if (mat3::min_entry(q) >= -kNegativeTolerance) {
    return {TransitionMatrix(checked_clip(q, "Q'")), R0, false, 0, std::min(0.0, mat3::min_entry(q))};
  }

  Matrix3 r = R0.entries();
  int passes = 0;
  while (passes < kMaxAmendmentPasses) {
    ++passes;
    const Matrix3 q3 = checked_clip(q, "Q''");
    const Matrix3 r1 = mat3::multiply(checked_inverse(q3, "Q'''"), p);
    r = checked_clip(r1, "R'");
    q = mat3::multiply(p, checked_inverse(r, "R''"));
    if (mat3::min_entry(q) >= -kNegativeTolerance) break;
  }
  const double worst = std::min(0.0, mat3::min_entry(q));
  return {TransitionMatrix(checked_clip(q, "Q''''")), TransitionMatrix(r), true, passes, worst};
}

Decomposition decompose(const TransitionCounts& counts) {
  const TransitionMatrix P = estimate_P(counts);
  const MarginalShares shares = shares_from_counts(counts);
  const TransitionMatrix R0 = solve_R(shares.fathers, shares.children);
  const Amendment am = amend_decomposition(P, R0);

  Decomposition d{P, am.Q, am.R, R0, shares.fathers, shares.children};
  d.amended = am.amended;
  d.amendment_passes = am.passes;
  d.qr_residual = mat3::max_abs_diff(mat3::multiply(am.Q.entries(), am.R.entries()), P.entries());
  const Vector3 implied = mat3::transpose_times(P.entries(), shares.fathers.values());
  for (std::size_t j = 0; j < kClassCount; ++j)
    d.share_residual = std::max(d.share_residual, std::abs(implied[j] - shares.children[j]));
  d.observations = counts.total();
  return d;
}

Estimates estimate_all(const Decomposition& d) {
  if (d.Q.trace() == 3.0)
    throw Error(ErrorKind::structural_index_undefined, "true mobility is zero (Q is the identity); I_OS undefined");
  const auto identified = model::identify_params(d.Q);
  return {model::mobility_indexes(d.P, d.Q, identified.params), identified.params, identified.validity};
}

namespace {

constexpr std::size_t kEstimateCount = 11;

std::array<double, kEstimateCount> flatten(const Estimates& e) {
  return {e.indexes.i_obs, e.indexes.i_true, e.indexes.i_os, e.indexes.i_opp, e.indexes.i_loi,
          e.params.lambda_M, e.params.lambda_U, e.params.theta_max, e.params.theta_min,
          e.params.theta_M_min, e.params.theta_M_max};
}

Estimates unflatten(const std::array<double, kEstimateCount>& v) {
  Estimates e;
  e.indexes = {v[0], v[1], v[2], v[3], v[4]};
  e.params = {v[5], v[6], v[7], v[8], v[9], v[10]};
  return e;
}

}  // namespace

BootstrapSummary bootstrap(std::span<const MicroRecord> records, const CohortSpec& cohort,
                           const BootstrapOptions& options) {
  if (options.replications < 1) throw Error(ErrorKind::usage, "bootstrap needs at least one replication");

  std::vector<MicroRecord> sample;
  for (const auto& rec : records)
    if (cohort.contains(rec.birth_year)) sample.push_back(rec);
  if (sample.empty()) throw Error(ErrorKind::data, "cohort '" + cohort.label + "' has no records");

  BootstrapSummary summary;
  summary.replications = options.replications;
  summary.seed = options.seed;
  summary.low_replication_warning = options.replications < kLowReplicationThreshold;

  const auto full = io::aggregate_counts(sample, cohort, options.use_weights);
  summary.observations = full.total();
  summary.point = estimate_all(decompose(full));

  std::vector<std::optional<std::array<double, kEstimateCount>>> results(options.replications);
  const std::size_t n = sample.size();
  auto run_replicate = [&](std::size_t r) {
    Rng rng(options.seed, r);
    TransitionCounts counts;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& rec = sample[rng.below(n)];
      counts.add(rec.father_class, rec.child_class, options.use_weights ? rec.weight : 1.0);
    }
    try {
      results[r] = flatten(estimate_all(decompose(counts)));
    } catch (const Error&) {
      results[r].reset();
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, options.replications));
  if (threads <= 1) {
    for (std::size_t r = 0; r < options.replications; ++r) run_replicate(r);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t r = t; r < options.replications; r += threads) run_replicate(r);
      });
    }
  }

  // Aggregation runs in replicate order so the result is independent of threading.
  std::array<double, kEstimateCount> mean{}, m2{};
  for (const auto& res : results) {
    if (!res) {
      ++summary.dropped;
      continue;
    }
    ++summary.successful;
    const double k = static_cast<double>(summary.successful);
    for (std::size_t i = 0; i < kEstimateCount; ++i) {
      const double delta = (*res)[i] - mean[i];
      mean[i] += delta / k;
      m2[i] += delta * ((*res)[i] - mean[i]);
    }
  }
  if (summary.successful == 0)
    throw Error(ErrorKind::bootstrap_failed, "every bootstrap replicate failed to decompose or identify");

  std::array<double, kEstimateCount> se{};
  if (summary.successful < 2) {
    summary.degenerate = true;
  } else {
    for (std::size_t i = 0; i < kEstimateCount; ++i)
      se[i] = std::sqrt(m2[i] / static_cast<double>(summary.successful - 1));
  }
  summary.se = unflatten(se);
  return summary;
}

PremiaReport income_premia(std::span<const IncomeRecord> incomes, const CohortSpec& cohort) {
  PremiaReport report;
  report.cohort = cohort.label;

  // wave -> class -> log incomes
  std::map<int, std::array<std::vector<double>, kClassCount>> by_wave;
  for (const auto& rec : incomes) {
    if (!cohort.contains(rec.birth_year)) continue;
    if (!std::isfinite(rec.income) || rec.income <= 0.0) {
      ++report.rejected;
      continue;
    }
    by_wave[rec.wave_year][index_of(rec.occ_class)].push_back(std::log(rec.income));
  }

  std::array<double, kClassCount> weight{}, mean_acc{}, sd_acc{};
  for (const auto& [wave, classes] : by_wave) {
    WaveMoments wm;
    wm.wave_year = wave;
    for (std::size_t c = 0; c < kClassCount; ++c) {
      const auto& xs = classes[c];
      ClassMoments& cm = wm.classes[c];
      cm.n = xs.size();
      if (xs.empty()) continue;
      double sum = 0.0;
      for (double x : xs) sum += x;
      cm.mean = sum / static_cast<double>(xs.size());
      if (xs.size() < 2) continue;
      double ss = 0.0;
      for (double x : xs) ss += (x - cm.mean) * (x - cm.mean);
      cm.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
      wm.used[c] = true;
      const double w = static_cast<double>(xs.size());
      weight[c] += w;
      mean_acc[c] += w * cm.mean;
      sd_acc[c] += w * cm.sd;
    }
    report.waves.push_back(wm);
  }

  for (std::size_t c = 0; c < kClassCount; ++c) {
    if (weight[c] == 0.0)
      throw Error(ErrorKind::data, "cohort '" + cohort.label + "': class " + std::string(class_name(class_at(c))) +
                                       " has fewer than 2 observations in every wave");
    report.pooled[c] = {static_cast<std::size_t>(weight[c]), mean_acc[c] / weight[c], sd_acc[c] / weight[c]};
  }

  const auto& W = report.pooled[0];
  const auto& M = report.pooled[1];
  const auto& U = report.pooled[2];
  report.mean_ratios_defined = W.mean != 0.0 && M.mean != 0.0;
  report.mean_ratio_MW = report.mean_ratios_defined ? M.mean / W.mean : std::nan("");
  report.mean_ratio_UM = report.mean_ratios_defined ? U.mean / M.mean : std::nan("");
  report.variance_ratios_defined = W.sd > 0.0 && M.sd > 0.0;
  report.var_ratio_MW = report.variance_ratios_defined ? (M.sd * M.sd) / (W.sd * W.sd) : std::nan("");
  report.var_ratio_UM = report.variance_ratios_defined ? (U.sd * U.sd) / (M.sd * M.sd) : std::nan("");
  return report;
}

double premium_interpretation(double ratio, double base_income) {
  if (!(base_income > 0.0)) throw Error(ErrorKind::data, "base income must be positive");
  return std::pow(base_income, ratio);
}

}  // namespace mobility::estimation
