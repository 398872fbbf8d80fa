#include "snorm/net/lipschitz.hpp"

#include <algorithm>
#include <cmath>

#include "snorm/error.hpp"
#include "snorm/linalg/decompositions.hpp"

namespace snorm::net {

double lipschitz_upper_bound(const Network& net, int power_steps) {
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    const Activation& act = net.specs()[i].activation;
    if (act.lipschitz_constant() > 1.0) {
      throw DomainError("lipschitz_upper_bound: layer " + std::to_string(i) + " activation " +
                        activation_name(act.kind) + " is not 1-Lipschitz");
    }
  }
  double bound = 1.0;
  for (const Matrix& w : effective_weights(net, power_steps)) {
    bound *= linalg::singular_values(w).front();
  }
  return bound;
}

double empirical_lipschitz(const Network& net, const Matrix& x, const Matrix& x_prime,
                           int power_steps) {
  if (x.rows() != x_prime.rows() || x.cols() != x_prime.cols()) {
    throw ShapeError("empirical_lipschitz: pair batches differ in shape");
  }
  BindOptions options;
  options.power_steps = power_steps;
  const Matrix fx = predict(net, x, options);
  const Matrix fy = predict(net, x_prime, options);
  double best = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < fx.cols(); ++j) num += (fx(i, j) - fy(i, j)) * (fx(i, j) - fy(i, j));
    for (std::size_t j = 0; j < x.cols(); ++j) den += (x(i, j) - x_prime(i, j)) * (x(i, j) - x_prime(i, j));
    if (den == 0.0) throw DomainError("empirical_lipschitz: pair " + std::to_string(i) + " coincides");
    best = std::max(best, std::sqrt(num / den));
  }
  return best;
}

}  // namespace snorm::net
