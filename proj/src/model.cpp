#include "mobility/model.hpp"

#include <cmath>
#include <sstream>

namespace mobility::model {

std::string describe(Assumption a) {
  switch (a) {
    case Assumption::wc_support_covers_lambda_U: return "theta_max >= lambda_U";
    case Assumption::mc_support_covers_lambda_U: return "theta_M_max >= lambda_U";
    case Assumption::thresholds_ordered: return "lambda_U >= lambda_M";
    case Assumption::mc_support_below_lambda_M: return "lambda_M >= theta_M_min";
    case Assumption::uc_support_below_lambda_M: return "lambda_M >= theta_min";
    case Assumption::mc_support_nonempty: return "theta_M_min < theta_M_max";
    case Assumption::unit_interval: return "parameters within [0,1] with theta_max > 0 and theta_min < 1";
  }
  return "unknown";
}

std::string ValidityReport::summary() const {
  if (valid()) return "valid";
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << "violated: " << describe(violations[i]);
  }
  return os.str();
}

ValidityReport validate(const ModelParams& p) {
  ValidityReport r;
  auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!in_unit(p.lambda_M) || !in_unit(p.lambda_U) || !in_unit(p.theta_max) ||
      !in_unit(p.theta_min) || !in_unit(p.theta_M_min) || !in_unit(p.theta_M_max) ||
      !(p.theta_max > 0.0) || !(p.theta_min < 1.0)) {
    r.violations.push_back(Assumption::unit_interval);
  }
  if (!(p.theta_max >= p.lambda_U)) r.violations.push_back(Assumption::wc_support_covers_lambda_U);
  if (!(p.theta_M_max >= p.lambda_U)) r.violations.push_back(Assumption::mc_support_covers_lambda_U);
  if (!(p.lambda_U >= p.lambda_M)) r.violations.push_back(Assumption::thresholds_ordered);
  if (!(p.lambda_M >= p.theta_M_min)) r.violations.push_back(Assumption::mc_support_below_lambda_M);
  if (!(p.lambda_M >= p.theta_min)) r.violations.push_back(Assumption::uc_support_below_lambda_M);
  if (!(p.theta_M_min < p.theta_M_max)) r.violations.push_back(Assumption::mc_support_nonempty);
  return r;
}

double risk_premium(double variance_ratio, double kappa) { return kappa * (variance_ratio - 1.0); }

Thresholds thresholds_from_primitives(const Primitives& p) {
  const double den_M = 2.0 * p.mu_M + p.delta * p.c_M_e;
  const double den_U = 2.0 * p.mu_U + p.delta * p.c_U_e;
  if (den_M == 0.0 || den_U == 0.0 || !std::isfinite(den_M) || !std::isfinite(den_U))
    throw Error(ErrorKind::invalid_primitives, "threshold denominator 2*mu + delta*c_e is zero");
  if (!(p.sigma2_W > 0.0) || !(p.sigma2_M > 0.0) || !(p.sigma2_U > 0.0))
    throw Error(ErrorKind::invalid_primitives, "utility variances must be strictly positive");
  if (!(p.mu_W <= p.mu_M && p.mu_M <= p.mu_U))
    throw Error(ErrorKind::invalid_primitives, "expected utilities must satisfy mu_W <= mu_M <= mu_U");
  if (!(p.c_U_e > p.c_M_e))
    throw Error(ErrorKind::invalid_primitives, "access costs must satisfy c_U_e > c_M_e");
  if (!(p.kappa >= 0.0) || !(p.delta >= 0.0 && p.delta <= 1.0))
    throw Error(ErrorKind::invalid_primitives, "kappa must be >= 0 and delta within [0,1]");

  Thresholds t;
  t.lambda_M = (p.mu_W + risk_premium(p.sigma2_M / p.sigma2_W, p.kappa) + p.c_M_e) / den_M;
  t.lambda_U = (p.mu_M + risk_premium(p.sigma2_U / p.sigma2_M, p.kappa) + p.c_U_e) / den_U;
  t.lambda_WU = (p.mu_W + risk_premium(p.sigma2_U / p.sigma2_W, p.kappa) + p.c_U_e) / den_U;
  t.ordering_holds = t.lambda_U > t.lambda_WU && t.lambda_WU > t.lambda_M;
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  t.in_unit_interval = in_unit(t.lambda_M) && in_unit(t.lambda_U) && in_unit(t.lambda_WU);
  return t;
}

TransitionMatrix build_true_matrix(const ModelParams& p) {
  if (p.theta_min == 1.0)
    throw Error(ErrorKind::degenerate_support, "theta_min = 1 leaves an empty Upper-parent support");
  const auto report = validate(p);
  if (!report.valid()) throw Error(ErrorKind::invalid_params, report.summary());

  const double mid = p.lambda_U - p.lambda_M;
  const double wc = p.theta_max;
  const double mc = p.theta_M_max - p.theta_M_min;
  const double uc = 1.0 - p.theta_min;

  Matrix3 q{};
  q[0] = {p.lambda_M / wc, mid / wc, (p.theta_max - p.lambda_U) / wc};
  q[1] = {(p.lambda_M - p.theta_M_min) / mc, mid / mc, (p.theta_M_max - p.lambda_U) / mc};
  q[2] = {(p.lambda_M - p.theta_min) / uc, mid / uc, (1.0 - p.lambda_U) / uc};
  return TransitionMatrix(q);
}

IdentifiedParams identify_params(const TransitionMatrix& q) {
  const double q11 = q(0, 0), q12 = q(0, 1);
  const double q21 = q(1, 0), q22 = q(1, 1);
  const double q32 = q(2, 1), q33 = q(2, 2);
  if (q11 <= 0.0 || q22 <= 0.0 || q33 <= 0.0)
    throw Error(ErrorKind::non_identifiable, "a diagonal entry of Q is zero; parameters are not identified");

  const double wc_ratio = 1.0 + q12 / q11;
  const double uc_ratio = q32 / q33;
  const double denominator = wc_ratio * (1.0 + uc_ratio) - 1.0;

  ModelParams p;
  if (uc_ratio == 0.0) {
    p.lambda_M = 0.0;
  } else if (denominator == 0.0) {
    throw Error(ErrorKind::degenerate, "identification denominator (1+q12/q11)(1+q32/q33)-1 is zero");
  } else {
    p.lambda_M = uc_ratio / denominator;
  }
  p.lambda_U = p.lambda_M * wc_ratio;
  p.theta_max = p.lambda_M / q11;
  p.theta_min = 1.0 - (1.0 - p.lambda_U) / q33;
  p.theta_M_min = p.lambda_M - (p.lambda_U - p.lambda_M) * (q21 / q22);
  p.theta_M_max = p.theta_M_min + (p.lambda_U - p.lambda_M) / q22;
  return {p, validate(p)};
}

double i_true_from_params(const ModelParams& p) {
  const double mc = p.theta_M_max - p.theta_M_min;
  const double uc = 1.0 - p.theta_min;
  if (!(p.theta_max > 0.0) || !(mc > 0.0) || !(uc > 0.0))
    throw Error(ErrorKind::degenerate_support, "endowment supports must have positive width");
  return 1.0 - (p.lambda_M / p.theta_max + (p.lambda_U - p.lambda_M) / mc + (1.0 - p.lambda_U) / uc) / 3.0;
}

double i_opp_from_params(const ModelParams& p) {
  return (1.0 + p.theta_max + p.theta_M_max - p.theta_min - p.theta_M_min) / 3.0;
}

double i_loi_from_params(const ModelParams& p) {
  const double mc = p.theta_M_max - p.theta_M_min;
  const double uc = 1.0 - p.theta_min;
  if (!(p.theta_max > 0.0) || !(mc > 0.0) || !(uc > 0.0))
    throw Error(ErrorKind::degenerate_support, "endowment supports must have positive width");
  return (1.0 + p.theta_max + p.theta_M_max - p.theta_min - p.theta_M_min + p.lambda_M / p.theta_max +
          (p.lambda_U - p.lambda_M) / mc + (1.0 - p.lambda_U) / uc) / 3.0 - 1.0;
}

MobilityIndexes mobility_indexes(const TransitionMatrix& p, const TransitionMatrix& q,
                                 const ModelParams& identified) {
  MobilityIndexes ix;
  ix.i_obs = 1.0 - p.trace() / 3.0;
  ix.i_true = 1.0 - q.trace() / 3.0;
  if (ix.i_true == 0.0)
    throw Error(ErrorKind::structural_index_undefined, "true mobility is zero (Q is the identity); I_OS undefined");
  ix.i_os = ix.i_obs / ix.i_true;
  ix.i_opp = i_opp_from_params(identified);
  ix.i_loi = ix.i_opp - ix.i_true;
  return ix;
}

MobilityIndexes mobility_indexes(const TransitionMatrix& p, const TransitionMatrix& q) {
  if (q.trace() == 3.0)
    throw Error(ErrorKind::structural_index_undefined, "true mobility is zero (Q is the identity); I_OS undefined");
  return mobility_indexes(p, q, identify_params(q).params);
}

TransitionMatrix pms_matrix(double lambda_M, double lambda_U) {
  if (!(0.0 <= lambda_M && lambda_M <= lambda_U && lambda_U <= 1.0))
    throw Error(ErrorKind::invalid_params, "perfectly mobile society needs 0 <= lambda_M <= lambda_U <= 1");
  const Vector3 row{lambda_M, lambda_U - lambda_M, 1.0 - lambda_U};
  return TransitionMatrix(Matrix3{row, row, row});
}

TransitionMatrix pis_matrix() { return TransitionMatrix(); }

}  // namespace mobility::model
