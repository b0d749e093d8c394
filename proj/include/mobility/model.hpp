#pragma once

#include <string>
#include <vector>

#include "mobility/types.hpp"

namespace mobility::model {

/// One inequality the parameters must satisfy for Q to be well defined.
enum class Assumption {
  wc_support_covers_lambda_U,   // theta_max >= lambda_U
  mc_support_covers_lambda_U,   // theta_M_max >= lambda_U
  thresholds_ordered,           // lambda_U >= lambda_M
  mc_support_below_lambda_M,    // lambda_M >= theta_M_min
  uc_support_below_lambda_M,    // lambda_M >= theta_min
  mc_support_nonempty,          // theta_M_min < theta_M_max
  unit_interval,                // every parameter inside its range
};

std::string describe(Assumption a);

/// Machine-readable list of violated assumptions. Empty means valid.
struct ValidityReport {
  std::vector<Assumption> violations;

  bool valid() const { return violations.empty(); }
  std::string summary() const;
};

ValidityReport validate(const ModelParams& params);

struct IdentifiedParams {
  ModelParams params;
  ValidityReport validity;
};

/// Risk premium as a function of the variance ratio: kappa * (ratio - 1).
double risk_premium(double variance_ratio, double kappa);

/// Income-incentive thresholds from the deep primitives. Validity of the
/// threshold ordering is reported in the result, never enforced.
Thresholds thresholds_from_primitives(const Primitives& p);

/// True-mobility matrix implied by the parameters. Throws invalid_params
/// naming the violated inequality, or degenerate_support when theta_min = 1.
TransitionMatrix build_true_matrix(const ModelParams& params);

/// Closed-form inverse of build_true_matrix. Values are never clamped; the
/// validity report says whether they describe a well-defined model.
///
/// When q12 = q32 = 0 the lambda_M ratio is 0/0; the numerator is zero and
/// lambda_M is taken as 0. A zero denominator with a nonzero numerator throws
/// Error(degenerate). A zero diagonal entry throws Error(non_identifiable).
IdentifiedParams identify_params(const TransitionMatrix& q);

/// Five indexes of observed, true, structural, opportunity and incentive
/// mobility. Throws structural_index_undefined when tr(Q) = 3.
MobilityIndexes mobility_indexes(const TransitionMatrix& p, const TransitionMatrix& q);

/// Same as above when the parameters have already been identified from q.
MobilityIndexes mobility_indexes(const TransitionMatrix& p, const TransitionMatrix& q,
                                 const ModelParams& identified);

/// 1 - tr(Q)/3 written directly in terms of the parameters.
double i_true_from_params(const ModelParams& params);

/// Equality-of-opportunity index from the support bounds.
double i_opp_from_params(const ModelParams& params);

/// Lack-of-incentives index written out explicitly in the parameters.
double i_loi_from_params(const ModelParams& params);

/// Perfectly mobile society: three identical rows.
TransitionMatrix pms_matrix(double lambda_M, double lambda_U);

/// Perfectly immobile society: the identity.
TransitionMatrix pis_matrix();

}  // namespace mobility::model
