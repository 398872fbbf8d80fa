#include "snorm/training/toy.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "snorm/error.hpp"
#include "snorm/overloaded.hpp"

namespace snorm::training {

namespace {

// Columns span the plane the manifold circle lives in.
Matrix manifold_basis(int dim) {
  Rng fixed(0x3a11f01dULL);
  return linalg::random_orthonormal(static_cast<std::size_t>(dim), 2, fixed);
}

std::vector<double> embed(const Matrix& basis, double angle) {
  std::vector<double> p(basis.rows());
  const double c = std::cos(angle), s = std::sin(angle);
  for (std::size_t i = 0; i < basis.rows(); ++i) p[i] = c * basis(i, 0) + s * basis(i, 1);
  return p;
}

}  // namespace

std::string target_name(const ToyTarget& target) {
  return std::visit(overloaded{
                        [](const GaussianRing&) { return std::string("ring"); },
                        [](const GaussianGrid&) { return std::string("grid"); },
                        [](const LowDimManifold&) { return std::string("manifold"); },
                    },
                    target);
}

void validate(const ToyTarget& target) {
  std::visit(overloaded{
                 [](const GaussianRing& r) {
                   if (r.k < 1) throw DomainError("ring: k must be >= 1");
                   if (!(r.sigma > 0.0)) throw DomainError("ring: sigma must be > 0");
                   if (!(r.radius > 0.0)) throw DomainError("ring: radius must be > 0");
                 },
                 [](const GaussianGrid& g) {
                   if (g.k < 1) throw DomainError("grid: k must be >= 1");
                   if (!(g.sigma > 0.0)) throw DomainError("grid: sigma must be > 0");
                   if (!(g.spacing > 0.0)) throw DomainError("grid: spacing must be > 0");
                 },
                 [](const LowDimManifold& m) {
                   if (m.embedding_dim < 2) throw DomainError("manifold: embedding_dim must be >= 2");
                   if (!(m.sigma > 0.0)) throw DomainError("manifold: sigma must be > 0");
                   if (m.anchors < 1) throw DomainError("manifold: anchors must be >= 1");
                 },
             },
             target);
}

std::size_t data_dim(const ToyTarget& target) {
  if (const auto* m = std::get_if<LowDimManifold>(&target)) {
    return static_cast<std::size_t>(m->embedding_dim);
  }
  return 2;
}

double component_sigma(const ToyTarget& target) {
  return std::visit([](const auto& t) { return t.sigma; }, target);
}

Matrix mode_centers(const ToyTarget& target) {
  validate(target);
  return std::visit(
      overloaded{
          [](const GaussianRing& r) {
            Matrix c(static_cast<std::size_t>(r.k), 2);
            for (int i = 0; i < r.k; ++i) {
              const double a = 2.0 * std::numbers::pi * i / r.k;
              c(i, 0) = r.radius * std::cos(a);
              c(i, 1) = r.radius * std::sin(a);
            }
            return c;
          },
          [](const GaussianGrid& g) {
            Matrix c(static_cast<std::size_t>(g.k * g.k), 2);
            const double offset = 0.5 * (g.k - 1) * g.spacing;
            for (int i = 0; i < g.k; ++i)
              for (int j = 0; j < g.k; ++j) {
                c(i * g.k + j, 0) = i * g.spacing - offset;
                c(i * g.k + j, 1) = j * g.spacing - offset;
              }
            return c;
          },
          [](const LowDimManifold& m) {
            const Matrix basis = manifold_basis(m.embedding_dim);
            Matrix c(static_cast<std::size_t>(m.anchors), static_cast<std::size_t>(m.embedding_dim));
            for (int i = 0; i < m.anchors; ++i) {
              auto p = embed(basis, 2.0 * std::numbers::pi * i / m.anchors);
              for (std::size_t j = 0; j < p.size(); ++j) c(i, j) = p[j];
            }
            return c;
          },
      },
      target);
}

ToySample sample_toy(const ToyTarget& target, std::size_t n, Rng& rng) {
  validate(target);
  const std::size_t dim = data_dim(target);
  ToySample out{Matrix(n, dim), std::vector<int>(n)};
  std::normal_distribution<double> noise(0.0, component_sigma(target));
  if (const auto* m = std::get_if<LowDimManifold>(&target)) {
    const Matrix basis = manifold_basis(m->embedding_dim);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const double step = 2.0 * std::numbers::pi / m->anchors;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = angle(rng);
      out.labels[i] = static_cast<int>(std::lround(a / step)) % m->anchors;
      auto p = embed(basis, a);
      for (std::size_t j = 0; j < dim; ++j) out.samples(i, j) = p[j] + noise(rng);
    }
    return out;
  }
  const Matrix centers = mode_centers(target);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(centers.rows()) - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = pick(rng);
    out.labels[i] = c;
    for (std::size_t j = 0; j < dim; ++j) out.samples(i, j) = centers(c, j) + noise(rng);
  }
  return out;
}

}  // namespace snorm::training
