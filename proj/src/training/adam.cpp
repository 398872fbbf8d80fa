#include "snorm/training/adam.hpp"

#include <cmath>

#include "snorm/error.hpp"

namespace snorm::training {

void validate(const AdamConfig& c) {
  if (!(c.alpha > 0.0)) throw DomainError("adam: alpha must be > 0");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0)) throw DomainError("adam: beta1 must lie in [0, 1)");
  if (!(c.beta2 >= 0.0 && c.beta2 < 1.0)) throw DomainError("adam: beta2 must lie in [0, 1)");
  if (!(c.epsilon > 0.0)) throw DomainError("adam: epsilon must be > 0");
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamMoments& moments,
               const AdamConfig& config, long t) {
  if (t < 1) throw DomainError("adam_step: t must be >= 1");
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter/gradient count mismatch");
  if (moments.m.empty()) {
    for (const Matrix* p : params) {
      moments.m.emplace_back(p->rows(), p->cols());
      moments.v.emplace_back(p->rows(), p->cols());
    }
  }
  if (moments.m.size() != params.size()) throw ShapeError("adam_step: moment count mismatch");

  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k]->values();
    auto g = grads[k].values();
    auto m = moments.m[k].values();
    auto v = moments.v[k].values();
    if (g.size() != p.size() || m.size() != p.size()) throw ShapeError("adam_step: tensor shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      p[i] -= config.alpha * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.epsilon);
    }
  }
  moments.step = t;
}

}  // namespace snorm::training
