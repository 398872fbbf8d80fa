#include "snorm/linalg/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "snorm/error.hpp"

namespace snorm::linalg {

namespace {

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": " + dims(a) + " vs " + dims(b));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ShapeError("Matrix: " + std::to_string(values_.size()) + " values for " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("Matrix::from_rows: ragged rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(values));
}

Matrix Matrix::column(std::span<const double> v) {
  return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Matrix Matrix::row(std::span<const double> v) {
  return Matrix(1, v.size(), std::vector<double>(v.begin(), v.end()));
}

Matrix Matrix::gaussian(std::size_t rows, std::size_t cols, Rng& rng, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(rows, cols);
  for (double& x : m.values_) x = normal(rng);
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

bool Matrix::is_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return x == 0.0; });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
  for (double& x : values_) x *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: " + dims(a) + " * " + dims(b));
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Matrix c(n, m);
  const double* bp = b.values().data();
  double* cp = c.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* crow = cp + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      const double* brow = bp + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("matmul_tn: " + dims(a) + "^T * " + dims(b));
  const std::size_t k = a.rows(), n = a.cols(), m = b.cols();
  Matrix c(n, m);
  double* cp = c.values().data();
  for (std::size_t p = 0; p < k; ++p) {
    const auto arow = a.row_span(p);
    const double* brow = b.row_span(p).data();
    for (std::size_t i = 0; i < n; ++i) {
      const double api = arow[i];
      if (api == 0.0) continue;
      double* crow = cp + i * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += api * brow[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("matmul_nt: " + dims(a) + " * " + dims(b) + "^T");
  const std::size_t n = a.rows(), m = b.rows(), k = a.cols();
  Matrix c(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.row_span(i).data();
    for (std::size_t j = 0; j < m; ++j) {
      const double* brow = b.row_span(j).data();
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      c(i, j) = s;
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix c = a;
  auto cv = c.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < cv.size(); ++i) cv[i] *= bv[i];
  return c;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw ShapeError("matvec: " + dims(a) + " * vector");
  std::vector<double> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row_span(i), x);
  return y;
}

std::vector<double> matvec_t(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.rows()) throw ShapeError("matvec_t: " + dims(a) + "^T * vector");
  std::vector<double> y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row_span(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += row[j] * x[i];
  }
  return y;
}

Matrix outer(std::span<const double> u, std::span<const double> v) {
  Matrix m(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  // Independent partial sums break the add dependency chain.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const std::size_t n = a.size(), n4 = n - n % 4;
  for (std::size_t i = 0; i < n4; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (std::size_t i = n4; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

double norm2(std::span<const double> v) {
  // Scaled accumulation keeps tiny and huge vectors from under/overflowing.
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double x : v) {
    const double r = x / scale;
    s += r * r;
  }
  return scale * std::sqrt(s);
}

double frobenius_norm(const Matrix& w) { return norm2(w.values()); }

double trace(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("trace: non-square " + dims(a));
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
  return s;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double x : a.values()) m = std::max(m, std::abs(x));
  return m;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.cols() != bottom.cols()) throw ShapeError("vstack: " + dims(top) + " over " + dims(bottom));
  std::vector<double> values(top.values().begin(), top.values().end());
  values.insert(values.end(), bottom.values().begin(), bottom.values().end());
  return Matrix(top.rows() + bottom.rows(), top.cols(), std::move(values));
}

Matrix random_orthonormal(std::size_t rows, std::size_t cols, Rng& rng) {
  const bool tall = rows >= cols;
  const std::size_t n = tall ? rows : cols;  // vector length
  const std::size_t k = tall ? cols : rows;  // vector count
  std::vector<std::vector<double>> basis;
  basis.reserve(k);
  while (basis.size() < k) {
    std::vector<double> q = random_unit_vector(n, rng);
    // Two passes of modified Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        const double proj = dot(q, b);
        for (std::size_t i = 0; i < n; ++i) q[i] -= proj * b[i];
      }
    }
    const double nq = norm2(q);
    if (nq < 1e-8) continue;
    for (double& x : q) x /= nq;
    basis.push_back(std::move(q));
  }
  Matrix m(rows, cols);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      if (tall)
        m(i, j) = basis[j][i];
      else
        m(j, i) = basis[j][i];
    }
  return m;
}

std::vector<double> random_unit_vector(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n);
  for (;;) {
    for (double& x : v) x = normal(rng);
    const double nv = norm2(v);
    if (nv > 0.0) {
      for (double& x : v) x /= nv;
      return v;
    }
  }
}

}  // namespace snorm::linalg
