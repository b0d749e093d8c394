#pragma once

#include <cmath>
#include <optional>

#include "mobility/types.hpp"

// Dense 3x3 helpers. Everything here is exact-size; there is no need for a
// general linear algebra dependency.
namespace mobility::mat3 {

inline Matrix3 identity() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

inline Matrix3 multiply(const Matrix3& a, const Matrix3& b) {
  Matrix3 out{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline Matrix3 transpose(const Matrix3& a) {
  Matrix3 out{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) out[i][j] = a[j][i];
  return out;
}

/// a^T v
inline Vector3 transpose_times(const Matrix3& a, const Vector3& v) {
  Vector3 out{};
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 3; ++i) out[j] += a[i][j] * v[i];
  return out;
}

inline double determinant(const Matrix3& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
         a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

/// Cofactor inverse; nullopt when |det| <= singular_tolerance.
inline std::optional<Matrix3> inverse(const Matrix3& a, double singular_tolerance = 1e-12) {
  const double det = determinant(a);
  if (!std::isfinite(det) || std::abs(det) <= singular_tolerance) return std::nullopt;
  Matrix3 inv{};
  inv[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
  inv[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
  inv[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
  inv[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
  inv[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
  inv[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
  inv[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
  inv[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
  inv[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
  return inv;
}

inline double max_abs_diff(const Matrix3& a, const Matrix3& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

inline double min_entry(const Matrix3& a) {
  double m = a[0][0];
  for (const auto& row : a)
    for (double v : row) m = std::min(m, v);
  return m;
}

/// Zeroes negative entries, then divides each row by its sum. Returns nullopt
/// if a row has no positive mass left.
inline std::optional<Matrix3> clip_and_normalize_rows(const Matrix3& a) {
  Matrix3 out{};
  for (std::size_t i = 0; i < 3; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      out[i][j] = a[i][j] > 0.0 ? a[i][j] : 0.0;
      sum += out[i][j];
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) return std::nullopt;
    for (std::size_t j = 0; j < 3; ++j) out[i][j] /= sum;
  }
  return out;
}

}  // namespace mobility::mat3
