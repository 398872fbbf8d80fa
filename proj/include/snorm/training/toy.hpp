#pragma once

#include <string>
#include <variant>
#include <vector>

#include "snorm/linalg/matrix.hpp"

namespace snorm::training {

using linalg::Matrix;

/// k Gaussians with standard deviation sigma, centers evenly spaced on a circle.
struct GaussianRing {
  int k = 8;
  double radius = 2.0;
  double sigma = 0.05;
  friend bool operator==(const GaussianRing&, const GaussianRing&) = default;
};

/// k x k Gaussians on a square lattice centered at the origin.
struct GaussianGrid {
  int k = 5;
  double spacing = 1.0;
  double sigma = 0.05;
  friend bool operator==(const GaussianGrid&, const GaussianGrid&) = default;
};

/// A unit circle embedded in `embedding_dim` dimensions through a fixed
/// orthonormal map, with isotropic noise. `anchors` evenly spaced points on the
/// circle act as modes for labelling and coverage.
struct LowDimManifold {
  int embedding_dim = 8;
  double sigma = 0.02;
  int anchors = 8;
  friend bool operator==(const LowDimManifold&, const LowDimManifold&) = default;
};

using ToyTarget = std::variant<GaussianRing, GaussianGrid, LowDimManifold>;

std::string target_name(const ToyTarget& target);
/// Throws DomainError on k < 1, sigma <= 0 and similar.
void validate(const ToyTarget& target);

std::size_t data_dim(const ToyTarget& target);
/// One row per mode.
Matrix mode_centers(const ToyTarget& target);
/// Per-component noise scale.
double component_sigma(const ToyTarget& target);

struct ToySample {
  Matrix samples;           // n x data_dim
  std::vector<int> labels;  // mode each row was drawn from (nearest anchor for the manifold)
};

ToySample sample_toy(const ToyTarget& target, std::size_t n, Rng& rng);

}  // namespace snorm::training
