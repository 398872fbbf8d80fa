#pragma once

#include <vector>

#include "snorm/linalg/matrix.hpp"
#include "snorm/training/toy.hpp"

namespace snorm::metrics {

struct ModeCoverage {
  int covered = 0;                      // modes with at least one assigned sample
  std::vector<std::size_t> histogram;   // samples assigned to each mode
  std::size_t unassigned = 0;           // samples farther than the threshold from every mode
};

/// Assigns each sample to its nearest mode center when within `threshold`.
ModeCoverage mode_coverage(const linalg::Matrix& samples, const training::ToyTarget& target,
                           double threshold);

/// Default threshold: three component standard deviations.
double default_coverage_threshold(const training::ToyTarget& target);

}  // namespace snorm::metrics
