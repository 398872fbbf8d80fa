#include "snorm/normalizers/gradient_penalty.hpp"

#include <random>

#include "snorm/error.hpp"

namespace snorm::normalizers {

std::vector<double> draw_interpolation_weights(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> eps(n);
  for (double& e : eps) e = unit(rng);
  return eps;
}

Matrix interpolate(const Matrix& real, const Matrix& fake, std::span<const double> eps) {
  if (real.rows() != fake.rows() || real.cols() != fake.cols()) {
    throw ShapeError("gradient_penalty: real and fake batches differ in shape");
  }
  if (eps.size() != real.rows()) throw ShapeError("gradient_penalty: one epsilon per row");
  Matrix out(real.rows(), real.cols());
  for (std::size_t i = 0; i < real.rows(); ++i)
    for (std::size_t j = 0; j < real.cols(); ++j)
      out(i, j) = eps[i] * real(i, j) + (1.0 - eps[i]) * fake(i, j);
  return out;
}

ad::Var gradient_penalty(const net::BoundNetwork& d, const Matrix& real, const Matrix& fake,
                         double lambda, std::span<const double> eps) {
  if (!(lambda >= 0.0)) throw DomainError("gradient_penalty: lambda must be >= 0");
  const ad::Var x_hat = ad::parameter(interpolate(real, fake, eps));
  const ad::Var out = d.forward(x_hat);
  if (out.cols() != 1) throw ShapeError("gradient_penalty: discriminator must have one output");
  const ad::Var wrt[] = {x_hat};
  const ad::Var gx = ad::grad(ad::sum(out), wrt, ad::GradOptions{true})[0];
  const ad::Var norms = ad::sqrt_safe(ad::sum_cols(ad::square(gx)));
  return ad::scale(ad::mean(ad::square(ad::add_scalar(norms, -1.0))), lambda);
}

PenaltyTerm gradient_penalty(const net::Network& d, const Matrix& real, const Matrix& fake,
                             double lambda, Rng& rng) {
  const std::vector<double> eps = draw_interpolation_weights(real.rows(), rng);
  const net::BoundNetwork bound = net::bind(d);
  const ad::Var value = gradient_penalty(bound, real, fake, lambda, eps);
  PenaltyTerm term;
  term.value = value.item();
  for (const ad::Var& g : ad::grad(value, bound.parameters())) term.gradients.push_back(g.value());
  return term;
}

}  // namespace snorm::normalizers
