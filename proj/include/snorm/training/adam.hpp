#pragma once

#include <span>
#include <vector>

#include "snorm/linalg/matrix.hpp"

namespace snorm::training {

using linalg::Matrix;

struct AdamConfig {
  double alpha = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// Throws DomainError unless alpha > 0, 0 <= beta < 1 and epsilon > 0.
void validate(const AdamConfig& config);

/// First and second moment estimates, one pair per parameter tensor.
struct AdamMoments {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long step = 0;

  friend bool operator==(const AdamMoments&, const AdamMoments&) = default;
};

/// Bias-corrected Adam update at step t >= 1:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
///   p <- p - alpha * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
/// Moments are zero-initialized on first use.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamMoments& moments,
               const AdamConfig& config, long t);

}  // namespace snorm::training
