#pragma once

#include <span>
#include <vector>

#include "snorm/linalg/matrix.hpp"
#include "snorm/net/network.hpp"
#include "snorm/normalizers/normalize.hpp"

namespace snorm::normalizers {

/// One epsilon ~ U[0, 1] per row.
std::vector<double> draw_interpolation_weights(std::size_t n, Rng& rng);

/// x_hat = eps * real + (1 - eps) * fake, row by row.
Matrix interpolate(const Matrix& real, const Matrix& fake, std::span<const double> eps);

/// lambda * mean_i (|grad_x D(x_hat_i)| - 1)^2 as a graph node.
///
/// The input gradient is taken with create_graph, so differentiating the
/// result with respect to the bound parameters runs the double backward.
ad::Var gradient_penalty(const net::BoundNetwork& d, const Matrix& real, const Matrix& fake,
                         double lambda, std::span<const double> eps);

/// Value and gradients (following Network::parameters()) of the penalty with
/// freshly drawn interpolation weights. D must have a single output.
PenaltyTerm gradient_penalty(const net::Network& d, const Matrix& real, const Matrix& fake,
                             double lambda, Rng& rng);

}  // namespace snorm::normalizers
