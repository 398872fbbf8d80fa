#pragma once

#include "snorm/net/network.hpp"

namespace snorm::net {

/// Product over layers of the oracle spectral norm of each effective weight.
///
/// Spectral layers are evaluated from a scratch copy of their state with
/// `power_steps` iterations (0 = configured n_power). Throws DomainError if an
/// activation's Lipschitz constant exceeds 1. For conv layers the norm is that
/// of the reshaped kernel matrix, not of the convolution operator.
double lipschitz_upper_bound(const Network& net, int power_steps = 0);

/// max_i |f(x_i) - f(x'_i)| / |x_i - x'_i| over paired rows.
/// Throws DomainError if a pair coincides.
double empirical_lipschitz(const Network& net, const Matrix& x, const Matrix& x_prime,
                           int power_steps = 0);

}  // namespace snorm::net
