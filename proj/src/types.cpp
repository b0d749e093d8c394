#include "mobility/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mobility {

char class_code(OccClass c) {
  switch (c) {
    case OccClass::Working: return 'W';
    case OccClass::Middle: return 'M';
    case OccClass::Upper: return 'U';
  }
  return '?';
}

std::string_view class_name(OccClass c) {
  switch (c) {
    case OccClass::Working: return "Working";
    case OccClass::Middle: return "Middle";
    case OccClass::Upper: return "Upper";
  }
  return "?";
}

OccClass parse_class_code(std::string_view code) {
  if (code.size() == 1) {
    switch (code[0]) {
      case 'W': case 'w': return OccClass::Working;
      case 'M': case 'm': return OccClass::Middle;
      case 'U': case 'u': return OccClass::Upper;
      default: break;
    }
  }
  throw Error(ErrorKind::data, "unknown class code '" + std::string(code) + "' (expected W, M or U)");
}

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_params: return "invalid-params";
    case ErrorKind::degenerate_support: return "degenerate-support";
    case ErrorKind::invalid_primitives: return "invalid-primitives";
    case ErrorKind::non_identifiable: return "non-identifiable";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::structural_index_undefined: return "structural-index-undefined";
    case ErrorKind::invalid_matrix: return "invalid-matrix";
    case ErrorKind::empty_parent_class: return "empty-parent-class";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::decomposition_failed: return "decomposition-failed";
    case ErrorKind::bootstrap_failed: return "bootstrap-failed";
    case ErrorKind::data: return "data";
    case ErrorKind::io: return "io";
    case ErrorKind::usage: return "usage";
  }
  return "unknown";
}

namespace {

void check_rows(const Matrix3& m, double tolerance) {
  for (std::size_t i = 0; i < kClassCount; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < kClassCount; ++j) {
      const double v = m[i][j];
      if (!std::isfinite(v) || v < -tolerance || v > 1.0 + tolerance) {
        std::ostringstream os;
        os << "entry (" << i << "," << j << ") = " << v << " is not a probability";
        throw Error(ErrorKind::invalid_matrix, os.str());
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      std::ostringstream os;
      os << "row " << i << " sums to " << sum << ", not 1";
      throw Error(ErrorKind::invalid_matrix, os.str());
    }
  }
}

}  // namespace

TransitionMatrix::TransitionMatrix()
    : entries_{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}} {}

TransitionMatrix::TransitionMatrix(const Matrix3& entries) : entries_(entries) {
  check_rows(entries_, kRowSumTolerance);
  // Tiny negative rounding residue is folded to zero so entries stay in [0,1].
  for (auto& row : entries_)
    for (auto& v : row) v = std::min(std::max(v, 0.0), 1.0);
}

TransitionMatrix TransitionMatrix::normalized(const Matrix3& entries, double tolerance) {
  check_rows(entries, tolerance);
  Matrix3 out{};
  for (std::size_t i = 0; i < kClassCount; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < kClassCount; ++j) sum += std::max(entries[i][j], 0.0);
    for (std::size_t j = 0; j < kClassCount; ++j) out[i][j] = std::max(entries[i][j], 0.0) / sum;
  }
  return TransitionMatrix(out);
}

ClassShares::ClassShares() : shares_{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0} {}

ClassShares::ClassShares(const Vector3& shares) : shares_(shares) {
  double sum = 0.0;
  for (double v : shares_) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorKind::data, "class shares must be nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    std::ostringstream os;
    os << "class shares sum to " << sum << ", not 1";
    throw Error(ErrorKind::data, os.str());
  }
}

ClassShares ClassShares::from_weights(const Vector3& weights) {
  double total = 0.0;
  for (double v : weights) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorKind::data, "class weights must be nonnegative");
    total += v;
  }
  if (total <= 0.0) throw Error(ErrorKind::data, "class weights sum to zero");
  return ClassShares({weights[0] / total, weights[1] / total, weights[2] / total});
}

}  // namespace mobility
