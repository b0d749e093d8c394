#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mobility {

/// Occupational class. Ordered Working < Middle < Upper; the underlying
/// value doubles as the row/column index of every 3x3 matrix.
enum class OccClass : int { Working = 0, Middle = 1, Upper = 2 };

inline constexpr std::size_t kClassCount = 3;
inline constexpr std::array<OccClass, kClassCount> kAllClasses{
    OccClass::Working, OccClass::Middle, OccClass::Upper};

constexpr std::size_t index_of(OccClass c) { return static_cast<std::size_t>(c); }
constexpr OccClass class_at(std::size_t i) { return static_cast<OccClass>(i); }

/// Single-letter code used by the file formats: W, M, U.
char class_code(OccClass c);
std::string_view class_name(OccClass c);
/// Accepts W|M|U in either case. Throws Error(kind = data) otherwise.
OccClass parse_class_code(std::string_view code);

using Vector3 = std::array<double, kClassCount>;
using Matrix3 = std::array<Vector3, kClassCount>;

enum class ErrorKind {
  invalid_params,
  degenerate_support,
  invalid_primitives,
  non_identifiable,
  degenerate,
  structural_index_undefined,
  invalid_matrix,
  empty_parent_class,
  infeasible,
  decomposition_failed,
  bootstrap_failed,
  data,
  io,
  usage,
};

std::string_view error_kind_name(ErrorKind kind);

/// The single exception type thrown by the library. The kind lets callers
/// (the CLI in particular) map failures to exit codes without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// 3x3 row-stochastic matrix: entries in [0,1], rows summing to 1 within 1e-9.
/// Rows are the parent class, columns the child class.
class TransitionMatrix {
 public:
  static constexpr double kRowSumTolerance = 1e-9;
  static constexpr double kIngestTolerance = 1e-6;

  /// Identity.
  TransitionMatrix();
  /// Validates the invariant; throws Error(invalid_matrix) on violation.
  explicit TransitionMatrix(const Matrix3& entries);

  /// Accepts rows that are stochastic within `tolerance` (e.g. tables rounded
  /// to two decimals), then renormalizes each row exactly.
  static TransitionMatrix normalized(const Matrix3& entries, double tolerance = kIngestTolerance);

  double operator()(std::size_t row, std::size_t col) const { return entries_[row][col]; }
  double operator()(OccClass from, OccClass to) const {
    return entries_[index_of(from)][index_of(to)];
  }
  const Matrix3& entries() const { return entries_; }
  double trace() const { return entries_[0][0] + entries_[1][1] + entries_[2][2]; }

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

 private:
  Matrix3 entries_;
};

/// Proportions by class; nonnegative and summing to 1 within 1e-9.
class ClassShares {
 public:
  static constexpr double kSumTolerance = 1e-9;

  ClassShares();
  explicit ClassShares(const Vector3& shares);
  /// Divides by the total; throws if any entry is negative or the total is 0.
  static ClassShares from_weights(const Vector3& weights);

  double operator[](std::size_t i) const { return shares_[i]; }
  double operator[](OccClass c) const { return shares_[index_of(c)]; }
  const Vector3& values() const { return shares_; }

  friend bool operator==(const ClassShares&, const ClassShares&) = default;

 private:
  Vector3 shares_;
};

/// The six parameters identified from the true-mobility matrix: two income
/// incentive thresholds and the bounds of the class-conditional endowment
/// supports.
struct ModelParams {
  double lambda_M = 0.0;
  double lambda_U = 0.0;
  double theta_max = 1.0;    // Working parents: U(0, theta_max)
  double theta_min = 0.0;    // Upper parents: U(theta_min, 1)
  double theta_M_min = 0.0;  // Middle parents: U(theta_M_min, theta_M_max)
  double theta_M_max = 1.0;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Deep parameters of the random-utility model. Forward use only.
struct Primitives {
  double mu_W = 0.0;
  double mu_M = 0.0;
  double mu_U = 0.0;
  double sigma2_W = 1.0;
  double sigma2_M = 1.0;
  double sigma2_U = 1.0;
  double c_M_e = 0.0;
  double c_U_e = 0.0;
  double delta = 0.0;
  double kappa = 0.0;
};

struct Thresholds {
  double lambda_M = 0.0;
  double lambda_U = 0.0;
  double lambda_WU = 0.0;
  /// lambda_U > lambda_WU > lambda_M.
  bool ordering_holds = false;
  /// All three thresholds inside [0,1].
  bool in_unit_interval = false;

  bool valid() const { return ordering_holds && in_unit_interval; }
};

struct MobilityIndexes {
  double i_obs = 0.0;
  double i_true = 0.0;
  double i_os = 0.0;
  double i_opp = 0.0;
  double i_loi = 0.0;
};

}  // namespace mobility
