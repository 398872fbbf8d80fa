#pragma once

#include <vector>

#include "snorm/linalg/matrix.hpp"

namespace snorm::metrics {

using linalg::Matrix;

struct GaussianFit {
  std::vector<double> mean;
  Matrix covariance;  // normalized by 1/(n-1)

  friend bool operator==(const GaussianFit&, const GaussianFit&) = default;
};

/// Sample mean and covariance of the rows. Throws DomainError for fewer than 2 rows.
GaussianFit fit_gaussian(const Matrix& samples);

/// |mu_p - mu_q|^2 + tr(C_p) + tr(C_q) - 2 tr((C_p C_q)^(1/2)).
///
/// The trace of the square root is the sum of square roots of the eigenvalues
/// of C_p^(1/2) C_q C_p^(1/2). Eigenvalues down to -1e-10 are clamped to zero;
/// anything more negative throws DomainError. Results within 1e-8 below zero
/// are returned as 0.
double frechet_distance(const GaussianFit& p, const GaussianFit& q);

}  // namespace snorm::metrics
