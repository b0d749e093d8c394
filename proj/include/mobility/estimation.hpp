#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mobility/model.hpp"
#include "mobility/records.hpp"
#include "mobility/types.hpp"

namespace mobility::estimation {

/// Row-normalized counts. Throws empty_parent_class when a row total is 0.
TransitionMatrix estimate_P(const TransitionCounts& counts);

struct MarginalShares {
  ClassShares fathers;
  ClassShares children;
};

/// Row totals and column totals over the grand total.
MarginalShares shares_from_counts(const TransitionCounts& counts);

/// Structural-mobility matrix with maximal trace such that
/// R^T fathers = children, rows sum to one and entries are nonnegative.
/// Throws empty_parent_class if a father share is zero (merge that class),
/// infeasible if the program has no solution.
TransitionMatrix solve_R(const ClassShares& fathers, const ClassShares& children);

struct Amendment {
  TransitionMatrix Q;
  TransitionMatrix R;
  bool amended = false;
  int passes = 0;
  /// Most negative entry of Q before the final clamp (0 when none).
  double clamped_negative = 0.0;
};

/// Splits P into Q R starting from the trace-maximal R0.
///
/// Q' = P R0^-1; if Q' has no negative entries it is returned with R0.
/// Otherwise: zero the negatives of Q' and row-normalize (Q'''), set
/// R' = Q'''^-1 P, zero its negatives and row-normalize (R''), and recompute
/// Q = P R''^-1. The pass repeats (at most kMaxAmendmentPasses) while Q has
/// entries below -kNegativeTolerance; what remains is clamped and
/// renormalized. Throws decomposition_failed on a singular matrix.
Amendment amend_decomposition(const TransitionMatrix& P, const TransitionMatrix& R0);

inline constexpr int kMaxAmendmentPasses = 5;
inline constexpr double kNegativeTolerance = 1e-9;

struct Decomposition {
  TransitionMatrix P;
  TransitionMatrix Q;
  TransitionMatrix R;
  /// Raw solution of the trace program, before amendment.
  TransitionMatrix R0;
  ClassShares fathers;
  ClassShares children;
  bool amended = false;
  int amendment_passes = 0;
  /// max |(Q R - P)_ij|
  double qr_residual = 0.0;
  /// max |(P^T fathers - children)_j|
  double share_residual = 0.0;
  double observations = 0.0;
};

/// estimate_P -> shares_from_counts -> solve_R -> amend_decomposition.
Decomposition decompose(const TransitionCounts& counts);

/// Everything estimated from one sample of transitions.
struct Estimates {
  MobilityIndexes indexes;
  ModelParams params;
  model::ValidityReport validity;
};

/// decompose + identify_params + mobility_indexes.
Estimates estimate_all(const Decomposition& d);

struct BootstrapOptions {
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  bool use_weights = false;
  /// 0 picks std::thread::hardware_concurrency(). Results do not depend on it.
  unsigned threads = 1;
};

inline constexpr std::size_t kLowReplicationThreshold = 200;

struct BootstrapSummary {
  std::size_t replications = 0;
  std::size_t successful = 0;
  std::size_t dropped = 0;
  std::uint64_t seed = 0;
  Estimates point;
  Estimates se;  // validity unused
  /// Fewer than two successful replicates: standard errors are reported as 0.
  bool degenerate = false;
  bool low_replication_warning = false;
  double observations = 0.0;
};

/// Resamples the cohort's father-child pairs with replacement. Replicate r
/// draws from Rng(seed, r); a replicate whose decomposition or
/// identification throws is dropped and counted. Standard errors are sample
/// standard deviations across the successful replicates.
BootstrapSummary bootstrap(std::span<const MicroRecord> records, const CohortSpec& cohort,
                           const BootstrapOptions& options);

struct ClassMoments {
  std::size_t n = 0;
  double mean = 0.0;  // of log income
  double sd = 0.0;    // sample standard deviation of log income
};

struct WaveMoments {
  int wave_year = 0;
  std::array<ClassMoments, kClassCount> classes{};
  /// A class enters the aggregate for this wave only with >= 2 observations.
  std::array<bool, kClassCount> used{};
};

struct PremiaReport {
  std::string cohort;
  std::vector<WaveMoments> waves;
  /// Observation-weighted means over waves of the per-wave mean and sd.
  std::array<ClassMoments, kClassCount> pooled{};
  double mean_ratio_MW = 0.0;
  double mean_ratio_UM = 0.0;
  double var_ratio_MW = 0.0;
  double var_ratio_UM = 0.0;
  bool mean_ratios_defined = true;
  bool variance_ratios_defined = true;
  std::size_t rejected = 0;
};

/// Return and risk premium proxies from the log of income. Records with a
/// nonpositive income are rejected and counted. Throws data when a class has
/// no wave with at least two observations.
PremiaReport income_premia(std::span<const IncomeRecord> incomes, const CohortSpec& cohort);

/// base_income ^ ratio: the income matching base_income once the ratio of
/// log-income means is applied.
double premium_interpretation(double ratio, double base_income);

}  // namespace mobility::estimation
