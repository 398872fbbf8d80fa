#pragma once

#include <cstddef>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace snorm {

using Rng = std::mt19937_64;

namespace linalg {

/// Dense real matrix, row-major, 64-bit.
///
/// Zero-row matrices are allowed so that an empty mini-batch is representable;
/// weights are always at least 1x1.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix column(std::span<const double> v);
  static Matrix row(std::span<const double> v);
  static Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng, double stddev = 1.0);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> row_span(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row_span(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }

  bool all_finite() const noexcept;
  bool is_zero() const noexcept;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s) noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);

Matrix matmul(const Matrix& a, const Matrix& b);
/// a^T b without forming the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a b^T without forming the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix hadamard(const Matrix& a, const Matrix& b);

std::vector<double> matvec(const Matrix& a, std::span<const double> x);
/// a^T x
std::vector<double> matvec_t(const Matrix& a, std::span<const double> x);
Matrix outer(std::span<const double> u, std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
double frobenius_norm(const Matrix& w);
double trace(const Matrix& a);
double max_abs(const Matrix& a);

/// Vertical concatenation. Column counts must agree.
Matrix vstack(const Matrix& top, const Matrix& bottom);

/// Random matrix with orthonormal columns (rows >= cols) or orthonormal rows (rows < cols).
Matrix random_orthonormal(std::size_t rows, std::size_t cols, Rng& rng);

/// Unit vector drawn uniformly from the sphere via normalized Gaussian draws.
std::vector<double> random_unit_vector(std::size_t n, Rng& rng);

}  // namespace linalg
}  // namespace snorm
