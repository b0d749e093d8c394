#pragma once

#include <string>

#include "mobility/types.hpp"

namespace mobility {

/// One father-child pair.
struct MicroRecord {
  int birth_year = 0;
  OccClass father_class = OccClass::Working;
  OccClass child_class = OccClass::Working;
  double weight = 1.0;

  friend bool operator==(const MicroRecord&, const MicroRecord&) = default;
};

struct IncomeRecord {
  int wave_year = 0;
  int birth_year = 0;
  OccClass occ_class = OccClass::Working;
  double income = 0.0;

  friend bool operator==(const IncomeRecord&, const IncomeRecord&) = default;
};

/// Children born in [birth_from, birth_to], both inclusive.
struct CohortSpec {
  std::string label;
  int birth_from = 0;
  int birth_to = 0;

  bool contains(int birth_year) const { return birth_year >= birth_from && birth_year <= birth_to; }
  friend bool operator==(const CohortSpec&, const CohortSpec&) = default;
};

/// Weighted father-class x child-class counts.
class TransitionCounts {
 public:
  TransitionCounts() : counts_{} {}
  /// Throws Error(data) on negative or non-finite entries.
  explicit TransitionCounts(const Matrix3& counts);

  double operator()(std::size_t from, std::size_t to) const { return counts_[from][to]; }
  double operator()(OccClass from, OccClass to) const { return counts_[index_of(from)][index_of(to)]; }
  void add(OccClass from, OccClass to, double weight);
  const Matrix3& values() const { return counts_; }
  double row_total(std::size_t from) const;
  double column_total(std::size_t to) const;
  double total() const;

  friend bool operator==(const TransitionCounts&, const TransitionCounts&) = default;

 private:
  Matrix3 counts_;
};

}  // namespace mobility
