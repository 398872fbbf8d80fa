#include "snorm/metrics/frechet.hpp"

#include <cmath>

#include "snorm/error.hpp"
#include "snorm/linalg/decompositions.hpp"

namespace snorm::metrics {

namespace {

constexpr double kNegativeEigenTolerance = 1e-10;
constexpr double kNegativeDistanceTolerance = 1e-8;

double clamped(double lambda, const char* what) {
  if (lambda < -kNegativeEigenTolerance) {
    throw DomainError(std::string("frechet_distance: ") + what + " has eigenvalue " +
                      std::to_string(lambda));
  }
  return lambda < 0.0 ? 0.0 : lambda;
}

Matrix psd_sqrt(const Matrix& c) {
  const auto e = linalg::symmetric_eigen(c);
  const std::size_t n = c.rows();
  Matrix scaled = e.vectors;
  for (std::size_t j = 0; j < n; ++j) {
    const double r = std::sqrt(clamped(e.values[j], "covariance"));
    for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= r;
  }
  return linalg::matmul_nt(scaled, e.vectors);
}

}  // namespace

GaussianFit fit_gaussian(const Matrix& samples) {
  const std::size_t n = samples.rows(), d = samples.cols();
  if (n < 2) throw DomainError("fit_gaussian: need at least 2 samples");
  GaussianFit fit{std::vector<double>(d, 0.0), Matrix(d, d)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) fit.mean[j] += samples(i, j);
  for (double& m : fit.mean) m /= static_cast<double>(n);
  Matrix centered = samples;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) centered(i, j) -= fit.mean[j];
  fit.covariance = linalg::matmul_tn(centered, centered) * (1.0 / static_cast<double>(n - 1));
  // Exact symmetry regardless of summation order.
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) fit.covariance(j, i) = fit.covariance(i, j);
  return fit;
}

double frechet_distance(const GaussianFit& p, const GaussianFit& q) {
  const std::size_t d = p.mean.size();
  if (q.mean.size() != d || p.covariance.rows() != d || p.covariance.cols() != d ||
      q.covariance.rows() != d || q.covariance.cols() != d) {
    throw ShapeError("frechet_distance: dimension mismatch");
  }
  double mean_term = 0.0;
  for (std::size_t i = 0; i < d; ++i) mean_term += (p.mean[i] - q.mean[i]) * (p.mean[i] - q.mean[i]);

  const Matrix s = psd_sqrt(p.covariance);
  const Matrix m = linalg::matmul(linalg::matmul(s, q.covariance), s);
  double root_trace = 0.0;
  for (double lambda : linalg::symmetric_eigen(m).values) root_trace += std::sqrt(clamped(lambda, "product"));

  const double f = mean_term + linalg::trace(p.covariance) + linalg::trace(q.covariance) - 2.0 * root_trace;
  if (f < 0.0) {
    if (f < -kNegativeDistanceTolerance) {
      throw DomainError("frechet_distance: negative result " + std::to_string(f));
    }
    return 0.0;
  }
  return f;
}

}  // namespace snorm::metrics
