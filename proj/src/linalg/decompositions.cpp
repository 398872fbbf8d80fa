#include "snorm/linalg/decompositions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "snorm/error.hpp"

namespace snorm::linalg {

namespace {

constexpr int kMaxSweeps = 80;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Columns of the working matrix are stored as rows so rotations touch contiguous memory.
// Without `vectors` only the singular values are meaningful.
SvdResult jacobi_tall(const Matrix& a, bool vectors) {
  const std::size_t m = a.rows(), n = a.cols();
  Matrix g = transpose(a);                               // n x m, row j = column j of a
  Matrix vt = vectors ? Matrix::identity(n) : Matrix();  // row j = column j of v
  std::vector<double> norms(n);
  const double tol = kEps * static_cast<double>(m);
  // Columns this small are zero to working precision; rotating them never settles.
  const double negligible = std::pow(kEps * frobenius_norm(a), 2);

  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    converged = true;
    // Squared column norms, refreshed each sweep and updated exactly per rotation in between.
    for (std::size_t j = 0; j < n; ++j) norms[j] = dot(g.row_span(j), g.row_span(j));
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto gp = g.row_span(p);
        auto gq = g.row_span(q);
        const double alpha = norms[p], beta = norms[q];
        const double gamma = dot(gp, gq);
        if (alpha <= negligible || beta <= negligible) continue;
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = gp[i], y = gq[i];
          gp[i] = c * x - s * y;
          gq[i] = s * x + c * y;
        }
        norms[p] = alpha - t * gamma;
        norms[q] = beta + t * gamma;
        if (!vectors) continue;
        auto vp = vt.row_span(p);
        auto vq = vt.row_span(q);
        for (std::size_t i = 0; i < n; ++i) {
          const double x = vp[i], y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
      }
    }
  }
  if (!converged) {
    throw OracleFailure("svd_oracle: no convergence after " + std::to_string(kMaxSweeps) +
                        " sweeps on " + std::to_string(m) + "x" + std::to_string(n));
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(g.row_span(j));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  if (!vectors) {
    SvdResult out{Matrix(), std::vector<double>(n), Matrix()};
    for (std::size_t k = 0; k < n; ++k) out.s[k] = sigma[order[k]];
    return out;
  }
  SvdResult out{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
  const double smax = n == 0 ? 0.0 : sigma[order[0]];
  const double zero_cut = smax * kEps * static_cast<double>(std::max(m, n));
  std::vector<std::size_t> missing;  // u columns needing completion
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.s[k] = sigma[j];
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = vt(j, i);
    if (sigma[j] > zero_cut && sigma[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) out.u(i, k) = g(j, i) / sigma[j];
    } else {
      missing.push_back(k);
    }
  }

  // Rank-deficient input: complete u with standard basis vectors orthogonalized
  // against the columns already present.
  std::vector<bool> filled(n, true);
  for (std::size_t k : missing) filled[k] = false;
  std::size_t candidate = 0;
  for (std::size_t k : missing) {
    for (; candidate < m && !filled[k]; ++candidate) {
      std::vector<double> e(m, 0.0);
      e[candidate] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t c = 0; c < n; ++c) {
          if (!filled[c]) continue;
          double proj = 0.0;
          for (std::size_t i = 0; i < m; ++i) proj += out.u(i, c) * e[i];
          for (std::size_t i = 0; i < m; ++i) e[i] -= proj * out.u(i, c);
        }
      }
      const double ne = norm2(e);
      if (ne > 1e-6) {
        for (std::size_t i = 0; i < m; ++i) out.u(i, k) = e[i] / ne;
        filled[k] = true;
      }
    }
  }
  return out;
}

}  // namespace

namespace {

void check_oracle_input(const Matrix& a) {
  if (a.empty()) throw ShapeError("svd_oracle: empty matrix");
  if (std::min(a.rows(), a.cols()) > kOracleMaxMinDim) {
    throw DomainError("svd_oracle: min(rows, cols) exceeds " + std::to_string(kOracleMaxMinDim));
  }
  if (!a.all_finite()) throw DomainError("svd_oracle: non-finite entries");
}

}  // namespace

SvdResult svd_oracle(const Matrix& a) {
  check_oracle_input(a);
  if (a.rows() >= a.cols()) return jacobi_tall(a, true);
  SvdResult t = jacobi_tall(transpose(a), true);
  return SvdResult{std::move(t.v), std::move(t.s), std::move(t.u)};
}

std::vector<double> singular_values(const Matrix& a) {
  check_oracle_input(a);
  return jacobi_tall(a.rows() >= a.cols() ? a : transpose(a), false).s;
}

SymmetricEigen symmetric_eigen(const Matrix& input) {
  if (input.rows() != input.cols()) throw ShapeError("symmetric_eigen: non-square input");
  const std::size_t n = input.rows();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (input(i, j) + input(j, i));
  Matrix v = Matrix::identity(n);

  const double scale = std::max(frobenius_norm(a), std::numeric_limits<double>::min());
  bool converged = n < 2;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= kEps * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= std::numeric_limits<double>::min()) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t =
            std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a(r, p), arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a(p, r), aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }
  if (!converged) throw OracleFailure("symmetric_eigen: no convergence");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

}  // namespace snorm::linalg
