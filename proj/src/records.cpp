#include "mobility/records.hpp"

#include <cmath>

namespace mobility {

TransitionCounts::TransitionCounts(const Matrix3& counts) : counts_(counts) {
  for (const auto& row : counts_)
    for (double v : row)
      if (!std::isfinite(v) || v < 0.0) throw Error(ErrorKind::data, "transition counts must be finite and nonnegative");
}

void TransitionCounts::add(OccClass from, OccClass to, double weight) {
  if (!std::isfinite(weight) || weight < 0.0) throw Error(ErrorKind::data, "record weight must be nonnegative");
  counts_[index_of(from)][index_of(to)] += weight;
}

double TransitionCounts::row_total(std::size_t from) const {
  return counts_[from][0] + counts_[from][1] + counts_[from][2];
}

double TransitionCounts::column_total(std::size_t to) const {
  return counts_[0][to] + counts_[1][to] + counts_[2][to];
}

double TransitionCounts::total() const { return row_total(0) + row_total(1) + row_total(2); }

}  // namespace mobility
