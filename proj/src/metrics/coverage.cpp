#include "snorm/metrics/coverage.hpp"

#include <cmath>
#include <limits>

#include "snorm/error.hpp"

namespace snorm::metrics {

ModeCoverage mode_coverage(const linalg::Matrix& samples, const training::ToyTarget& target,
                           double threshold) {
  if (!(threshold > 0.0)) throw DomainError("mode_coverage: threshold must be > 0");
  const linalg::Matrix centers = training::mode_centers(target);
  if (samples.rows() > 0 && samples.cols() != centers.cols()) {
    throw ShapeError("mode_coverage: sample dimension does not match the target");
  }
  ModeCoverage out;
  out.histogram.assign(centers.rows(), 0);
  const double limit = threshold * threshold;
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_mode = 0;
    for (std::size_t c = 0; c < centers.rows(); ++c) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < centers.cols(); ++j) {
        const double diff = samples(i, j) - centers(c, j);
        d2 += diff * diff;
      }
      if (d2 < best) {
        best = d2;
        best_mode = c;
      }
    }
    if (best <= limit) {
      ++out.histogram[best_mode];
    } else {
      ++out.unassigned;
    }
  }
  for (std::size_t h : out.histogram) out.covered += h > 0 ? 1 : 0;
  return out;
}

double default_coverage_threshold(const training::ToyTarget& target) {
  return 3.0 * training::component_sigma(target);
}

}  // namespace snorm::metrics
