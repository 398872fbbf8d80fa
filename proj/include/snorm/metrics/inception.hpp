#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "snorm/linalg/matrix.hpp"
#include "snorm/training/toy.hpp"

namespace snorm::metrics {

using linalg::Matrix;

/// Maps a batch of samples to class-probability rows.
using Classifier = std::function<Matrix(const Matrix&)>;

/// exp(mean_n KL(p(y|x_n) || p(y))) with p(y) the mean of the rows.
/// Rows must be non-negative and sum to 1 within 1e-9 (DomainError otherwise).
double inception_style_score(const Matrix& probs);

/// Multinomial logistic regression, the bundled default classifier.
class SoftmaxClassifier {
 public:
  SoftmaxClassifier() = default;
  SoftmaxClassifier(Matrix weight, Matrix bias);

  /// Full-batch Adam on the cross-entropy from zero initialization.
  static SoftmaxClassifier fit(const Matrix& samples, const std::vector<int>& labels,
                               std::size_t classes, int steps = 2000, double learning_rate = 0.1);

  std::size_t classes() const { return weight_.rows(); }
  Matrix probabilities(const Matrix& samples) const;
  double accuracy(const Matrix& samples, const std::vector<int>& labels) const;
  Classifier as_classifier() const;

 private:
  Matrix weight_;  // classes x dim
  Matrix bias_;    // 1 x classes
};

/// Trains the default classifier on labelled draws from `target`.
SoftmaxClassifier train_mode_classifier(const training::ToyTarget& target, std::uint64_t seed,
                                        std::size_t samples = 4000);

}  // namespace snorm::metrics
