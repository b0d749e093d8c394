#include "mobility/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "mobility/types.hpp"

namespace mobility::lp {

void LinearProgram::add_equality(const std::vector<double>& row, double rhs) {
  if (row.size() != var_count) throw Error(ErrorKind::invalid_matrix, "constraint row has the wrong length");
  a.insert(a.end(), row.begin(), row.end());
  b.push_back(rhs);
}

std::string_view status_name(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

double residual_inf_norm(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t i = 0; i < lp.constraint_count(); ++i) {
    double s = -lp.b[i];
    for (std::size_t j = 0; j < lp.var_count; ++j) s += lp.coeff(i, j) * x[j];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

namespace {

// Tableau with `rows` constraint rows plus one objective row (the last).
// Column `cols - 1` holds the right-hand side.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_((rows + 1) * cols, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& rhs(std::size_t r) { return at(r, cols_ - 1); }
  double& cost(std::size_t c) { return at(rows_, c); }
  std::size_t rows() const { return rows_; }
  std::size_t rhs_col() const { return cols_ - 1; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double inv = 1.0 / at(pr, pc);
    for (std::size_t c = 0; c < cols_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < cols_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
  }

  void drop_row(std::size_t r) {
    data_.erase(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
    --rows_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

enum class PhaseResult { optimal, unbounded };

// Bland's rule: entering column is the lowest eligible index with a negative
// reduced cost; leaving row minimizes the ratio, ties to the lowest basic index.
PhaseResult run_simplex(Tableau& t, std::vector<std::size_t>& basis, std::size_t eligible_cols, double tol) {
  for (;;) {
    std::optional<std::size_t> entering;
    for (std::size_t c = 0; c < eligible_cols; ++c) {
      if (t.cost(c) < -tol) {
        entering = c;
        break;
      }
    }
    if (!entering) return PhaseResult::optimal;

    std::optional<std::size_t> leaving;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < t.rows(); ++r) {
      const double coef = t.at(r, *entering);
      if (coef <= tol) continue;
      const double ratio = t.rhs(r) / coef;
      if (!leaving || ratio < best_ratio || (ratio == best_ratio && basis[r] < basis[*leaving])) {
        leaving = r;
        best_ratio = ratio;
      }
    }
    if (!leaving) return PhaseResult::unbounded;
    t.pivot(*leaving, *entering);
    basis[*leaving] = *entering;
  }
}

// Solves the square system B x_B = b from the original data with partial
// pivoting; used to polish the basic solution after the tableau pivots.
std::optional<std::vector<double>> solve_basis(const LinearProgram& lp, const std::vector<std::size_t>& kept_rows,
                                               const std::vector<std::size_t>& basis) {
  const std::size_t m = basis.size();
  std::vector<double> mat(m * (m + 1));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) mat[i * (m + 1) + j] = lp.coeff(kept_rows[i], basis[j]);
    mat[i * (m + 1) + m] = lp.b[kept_rows[i]];
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(mat[r * (m + 1) + col]) > std::abs(mat[piv * (m + 1) + col])) piv = r;
    if (std::abs(mat[piv * (m + 1) + col]) < 1e-14) return std::nullopt;
    if (piv != col)
      for (std::size_t c = 0; c <= m; ++c) std::swap(mat[piv * (m + 1) + c], mat[col * (m + 1) + c]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = mat[r * (m + 1) + col] / mat[col * (m + 1) + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c <= m; ++c) mat[r * (m + 1) + c] -= f * mat[col * (m + 1) + c];
    }
  }
  std::vector<double> xb(m);
  for (std::size_t i = 0; i < m; ++i) xb[i] = mat[i * (m + 1) + m] / mat[i * (m + 1) + i];
  return xb;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SolverOptions& options) {
  const std::size_t n = lp.var_count;
  const std::size_t m = lp.constraint_count();
  if (n == 0 || lp.objective.size() != n || lp.a.size() != m * n)
    throw Error(ErrorKind::invalid_matrix, "linear program dimensions are inconsistent");
  for (double v : lp.a)
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_matrix, "constraint matrix has non-finite entries");
  for (double v : lp.b)
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_matrix, "right-hand side has non-finite entries");
  for (double v : lp.objective)
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_matrix, "objective has non-finite entries");

  const double tol = options.pivot_tolerance;
  double b_scale = 1.0;
  for (double v : lp.b) b_scale = std::max(b_scale, std::abs(v));

  // Phase 1: columns [0, n) original, [n, n + m) artificial, last = rhs.
  Tableau t(m, n + m + 1);
  std::vector<std::size_t> basis(m);
  std::vector<std::size_t> row_origin(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = lp.b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = sign * lp.coeff(i, j);
    t.at(i, n + i) = 1.0;
    t.rhs(i) = sign * lp.b[i];
    basis[i] = n + i;
    row_origin[i] = i;
  }
  for (std::size_t c = 0; c <= n + m; ++c) {
    if (c >= n && c < n + m) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += t.at(i, c);
    t.cost(c) = -s;
  }
  run_simplex(t, basis, n + m, tol);

  LpSolution out;
  out.x.assign(n, 0.0);
  if (-t.cost(t.rhs_col()) > options.feasibility_tolerance * b_scale) {
    out.status = LpStatus::infeasible;
    return out;
  }

  // Drive remaining artificials out of the basis; rows where that is
  // impossible are linearly dependent and are dropped.
  for (std::size_t r = 0; r < t.rows();) {
    if (basis[r] < n) {
      ++r;
      continue;
    }
    std::optional<std::size_t> col;
    for (std::size_t c = 0; c < n; ++c) {
      if (std::abs(t.at(r, c)) > tol) {
        col = c;
        break;
      }
    }
    if (col) {
      t.pivot(r, *col);
      basis[r] = *col;
      ++r;
    } else {
      t.drop_row(r);
      basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(r));
      row_origin.erase(row_origin.begin() + static_cast<std::ptrdiff_t>(r));
    }
  }

  // Phase 2 objective row: reduced costs c_j - c_B B^-1 a_j.
  for (std::size_t c = 0; c <= n + m; ++c) t.cost(c) = 0.0;
  for (std::size_t c = 0; c < n; ++c) t.cost(c) = lp.objective[c];
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const double cb = lp.objective[basis[r]];
    if (cb == 0.0) continue;
    for (std::size_t c = 0; c <= n + m; ++c) t.cost(c) -= cb * t.at(r, c);
  }
  if (run_simplex(t, basis, n, tol) == PhaseResult::unbounded) {
    out.status = LpStatus::unbounded;
    return out;
  }

  if (auto xb = solve_basis(lp, row_origin, basis)) {
    for (std::size_t r = 0; r < basis.size(); ++r) out.x[basis[r]] = (*xb)[r];
  } else {
    for (std::size_t r = 0; r < t.rows(); ++r) out.x[basis[r]] = t.rhs(r);
  }
  for (double& v : out.x)
    if (v < 0.0 && v > -options.feasibility_tolerance) v = 0.0;
  out.status = LpStatus::optimal;
  out.objective_value = 0.0;
  for (std::size_t j = 0; j < n; ++j) out.objective_value += lp.objective[j] * out.x[j];
  return out;
}

}  // namespace mobility::lp
