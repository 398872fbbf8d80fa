#include "snorm/metrics/inception.hpp"

#include <algorithm>
#include <cmath>

#include "snorm/error.hpp"
#include "snorm/training/adam.hpp"

namespace snorm::metrics {

double inception_style_score(const Matrix& probs) {
  const std::size_t n = probs.rows(), c = probs.cols();
  if (n == 0 || c == 0) throw DomainError("inception_style_score: empty probability batch");
  std::vector<double> marginal(c, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double p = probs(i, j);
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw DomainError("inception_style_score: row " + std::to_string(i) + " has an invalid entry");
      }
      total += p;
      marginal[j] += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw DomainError("inception_style_score: row " + std::to_string(i) + " does not sum to 1");
    }
  }
  for (double& m : marginal) m /= static_cast<double>(n);
  double kl_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      const double p = probs(i, j);
      if (p > 0.0) kl_sum += p * (std::log(p) - std::log(marginal[j]));
    }
  return std::exp(kl_sum / static_cast<double>(n));
}

SoftmaxClassifier::SoftmaxClassifier(Matrix weight, Matrix bias)
    : weight_(std::move(weight)), bias_(std::move(bias)) {
  if (bias_.rows() != 1 || bias_.cols() != weight_.rows()) {
    throw ShapeError("SoftmaxClassifier: bias must be 1 x classes");
  }
}

Matrix SoftmaxClassifier::probabilities(const Matrix& samples) const {
  if (samples.cols() != weight_.cols()) throw ShapeError("SoftmaxClassifier: input dimension mismatch");
  Matrix logits = linalg::matmul_nt(samples, weight_);
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto row = logits.row_span(i);
    double top = -INFINITY;
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] += bias_(0, j);
      top = std::max(top, row[j]);
    }
    double z = 0.0;
    for (double& x : row) {
      x = std::exp(x - top);
      z += x;
    }
    for (double& x : row) x /= z;
  }
  return logits;
}

SoftmaxClassifier SoftmaxClassifier::fit(const Matrix& samples, const std::vector<int>& labels,
                                         std::size_t classes, int steps, double learning_rate) {
  const std::size_t n = samples.rows();
  if (n == 0 || labels.size() != n) throw ShapeError("SoftmaxClassifier::fit: one label per sample");
  if (classes == 0) throw DomainError("SoftmaxClassifier::fit: no classes");
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes) throw DomainError("SoftmaxClassifier::fit: label out of range");
  }
  SoftmaxClassifier model(Matrix(classes, samples.cols()), Matrix(1, classes));
  training::AdamConfig adam{learning_rate, 0.9, 0.999, 1e-8};
  training::AdamMoments moments;
  Matrix* params[] = {&model.weight_, &model.bias_};
  for (int t = 1; t <= steps; ++t) {
    Matrix residual = model.probabilities(samples);
    for (std::size_t i = 0; i < n; ++i) residual(i, static_cast<std::size_t>(labels[i])) -= 1.0;
    residual *= 1.0 / static_cast<double>(n);
    Matrix grads[2] = {linalg::matmul_tn(residual, samples), Matrix(1, classes)};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < classes; ++j) grads[1](0, j) += residual(i, j);
    training::adam_step(params, grads, moments, adam, t);
  }
  return model;
}

double SoftmaxClassifier::accuracy(const Matrix& samples, const std::vector<int>& labels) const {
  const Matrix p = probabilities(samples);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    auto row = p.row_span(i);
    const auto best = std::max_element(row.begin(), row.end()) - row.begin();
    if (best == labels[i]) ++hits;
  }
  return p.rows() == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(p.rows());
}

Classifier SoftmaxClassifier::as_classifier() const {
  return [model = *this](const Matrix& x) { return model.probabilities(x); };
}

SoftmaxClassifier train_mode_classifier(const training::ToyTarget& target, std::uint64_t seed,
                                        std::size_t samples) {
  Rng rng(seed);
  const auto data = training::sample_toy(target, samples, rng);
  return SoftmaxClassifier::fit(data.samples, data.labels, training::mode_centers(target).rows());
}

}  // namespace snorm::metrics
