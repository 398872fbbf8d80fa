#pragma once

#include <vector>

#include "snorm/linalg/matrix.hpp"

namespace snorm::linalg {

/// Thin SVD: a = u * diag(s) * v^T with k = min(rows, cols) columns in u and v.
struct SvdResult {
  Matrix u;
  std::vector<double> s;  // descending, non-negative
  Matrix v;
};

/// Largest input dimension the oracle accepts.
inline constexpr std::size_t kOracleMaxMinDim = 512;

/// One-sided (Hestenes) Jacobi SVD.
///
/// Slow but accurate to a few ulps of ||a||; meant as a reference for the
/// power-iteration estimates, not for use inside training loops.
/// Throws OracleFailure if the sweep cap is reached.
SvdResult svd_oracle(const Matrix& a);

/// Singular values only, descending.
std::vector<double> singular_values(const Matrix& a);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column i pairs with values[i]
};

/// Cyclic Jacobi eigensolver for symmetric matrices. The input is symmetrized
/// as (a + a^T) / 2 before iterating.
SymmetricEigen symmetric_eigen(const Matrix& a);

}  // namespace snorm::linalg
