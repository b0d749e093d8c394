#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace mobility::lp {

/// minimize objective . x  subject to  A x = b,  x >= 0.
/// A is stored row-major with `var_count` columns.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<double> a;  // rows * var_count, row-major
  std::vector<double> b;
  std::size_t var_count = 0;

  std::size_t constraint_count() const { return b.size(); }
  double coeff(std::size_t row, std::size_t col) const { return a[row * var_count + col]; }

  /// Appends the equality row . x = rhs.
  void add_equality(const std::vector<double>& row, double rhs);
};

enum class LpStatus { optimal, infeasible, unbounded };

std::string_view status_name(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective_value = 0.0;
};

struct SolverOptions {
  double pivot_tolerance = 1e-10;
  double feasibility_tolerance = 1e-9;
};

/// Dense two-phase simplex with Bland's rule. Returns a basic optimal
/// solution; identical inputs give bit-identical outputs. Throws
/// Error(invalid_matrix) only on inconsistent dimensions or non-finite data.
LpSolution solve_lp(const LinearProgram& lp, const SolverOptions& options = {});

/// max_i |(A x - b)_i|
double residual_inf_norm(const LinearProgram& lp, const std::vector<double>& x);

}  // namespace mobility::lp
