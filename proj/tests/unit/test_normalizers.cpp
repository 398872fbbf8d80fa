#include <cmath>

#include "doctest.h"
#include "snorm/error.hpp"
#include "snorm/linalg/decompositions.hpp"
#include "snorm/normalizers/gradient_penalty.hpp"
#include "snorm/normalizers/normalize.hpp"

using snorm::Rng;
using snorm::linalg::Matrix;
namespace la = snorm::linalg;
namespace nz = snorm::normalizers;
namespace net = snorm::net;

namespace {

double sum_sq(const std::vector<double>& s) {
  double t = 0;
  for (double x : s) t += x * x;
  return t;
}

bool near(const Matrix& a, const Matrix& b, double tol) {
  return la::max_abs(a - b) <= tol;
}

}  // namespace

TEST_CASE("apply_spectral") {
  Rng rng(2);
  auto st = la::make_spectral_state(2, 2, rng);
  CHECK(near(nz::apply_spectral(Matrix::identity(2) * 5.0, st, 1, rng).weight, Matrix::identity(2), 1e-15));
  auto r = nz::apply_spectral(Matrix::diagonal(std::vector<double>{4, 2}), st, 100, rng);
  CHECK(near(r.weight, Matrix::diagonal(std::vector<double>{1, 0.5}), 1e-12));
  CHECK_THROWS_AS(nz::apply_spectral(Matrix(2, 2), st, 1, rng), snorm::ZeroMatrixError);
}

TEST_CASE("apply_reparam") {
  Rng rng(2);
  auto st = la::make_spectral_state(2, 2, rng);
  Matrix w = Matrix::diagonal(std::vector<double>{4, 2});
  CHECK(near(nz::apply_reparam(w, 2.0, st, 100, rng).weight, Matrix::diagonal(std::vector<double>{2, 1}), 1e-12));
  Rng a(5), b(5);
  CHECK(nz::apply_reparam(w, 1.0, st, 3, a).weight == nz::apply_spectral(w, st, 3, b).weight);
  CHECK_THROWS_AS(nz::apply_reparam(w, 0.0, st, 1, rng), snorm::DomainError);
}

TEST_CASE("apply_weight_norm") {
  CHECK(near(nz::apply_weight_norm(Matrix::from_rows({{3, 4}, {0, 5}})),
             Matrix::from_rows({{0.6, 0.8}, {0, 1}}), 1e-15));
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    Matrix w = nz::apply_weight_norm(Matrix::gaussian(5 + t, 9 - t % 4, rng));
    CHECK(std::abs(sum_sq(la::singular_values(w)) - static_cast<double>(w.rows())) <= 1e-9);
  }
  Matrix row = nz::apply_weight_norm(Matrix::gaussian(1, 6, rng));
  CHECK(la::singular_values(row)[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(nz::apply_weight_norm(Matrix::from_rows({{1, 1}, {0, 0}})), snorm::ZeroMatrixError);
}

TEST_CASE("weight norm rank-one extremality") {
  const std::size_t d_o = 5, d_i = 4;
  Rng rng(17);
  Matrix w = nz::apply_weight_norm(Matrix::gaussian(d_o, d_i, rng));
  for (int t = 0; t < 2000; ++t) {
    auto h = la::random_unit_vector(d_i, rng);
    CHECK(la::norm2(la::matvec(w, h)) <= std::sqrt(static_cast<double>(d_o)) + 1e-12);
  }
  // Every row equal to the same unit vector h attains sqrt(d_o) at h.
  auto h = la::random_unit_vector(d_i, rng);
  Matrix rank_one(d_o, d_i);
  for (std::size_t i = 0; i < d_o; ++i)
    for (std::size_t j = 0; j < d_i; ++j) rank_one(i, j) = h[j];
  rank_one = nz::apply_weight_norm(rank_one);
  CHECK(std::abs(la::norm2(la::matvec(rank_one, h)) - std::sqrt(static_cast<double>(d_o))) <= 1e-6);
}

TEST_CASE("apply_frobenius") {
  CHECK(near(nz::apply_frobenius(Matrix::from_rows({{3, 4}})), Matrix::from_rows({{0.6, 0.8}}), 1e-15));
  CHECK(near(nz::apply_frobenius(Matrix::identity(2)), Matrix::identity(2) * (1 / std::sqrt(2.0)), 1e-15));
  Rng rng(4);
  Matrix w = nz::apply_frobenius(Matrix::gaussian(7, 3, rng));
  CHECK(std::abs(la::frobenius_norm(w) - 1.0) <= 1e-12);
  CHECK(std::abs(sum_sq(la::singular_values(w)) - 1.0) <= 1e-9);
  CHECK_THROWS_AS(nz::apply_frobenius(Matrix(2, 3)), snorm::ZeroMatrixError);
}

TEST_CASE("apply_clip") {
  CHECK(nz::apply_clip(Matrix(1, 1, 0.5), 0.01)(0, 0) == 0.01);
  Matrix already = Matrix::from_rows({{0.005, -0.01}, {0.0, 0.009}});
  CHECK(nz::apply_clip(already, 0.01) == already);
  CHECK(nz::apply_clip(Matrix(2, 2, -3.0), 0.01) == Matrix(2, 2, -0.01));
  Rng rng(6);
  Matrix w = Matrix::gaussian(4, 4, rng);
  Matrix once = nz::apply_clip(w, 0.3);
  CHECK(nz::apply_clip(once, 0.3) == once);
  CHECK(la::max_abs(once) <= 0.3);
  CHECK_THROWS_AS(nz::apply_clip(w, 0.0), snorm::DomainError);
}

TEST_CASE("orthonormal_penalty") {
  Rng rng(8);
  CHECK(nz::orthonormal_penalty(la::random_orthonormal(6, 4, rng), 1.0).value <= 1e-24);
  CHECK(nz::orthonormal_penalty(Matrix::identity(2) * 2.0, 1.0).value == doctest::Approx(18.0));
  Matrix w = Matrix::gaussian(5, 3, rng);
  const double beta = 0.7, h = 1e-6;
  auto term = nz::orthonormal_penalty(w, beta);
  for (std::size_t k = 0; k < w.size(); ++k) {
    Matrix up = w, down = w;
    up.values()[k] += h;
    down.values()[k] -= h;
    const double fd = (nz::orthonormal_penalty(up, beta).value - nz::orthonormal_penalty(down, beta).value) / (2 * h);
    const double a = term.gradients[0].values()[k];
    CHECK(std::abs(a - fd) <= 1e-6 * std::max(1.0, std::abs(a)));
  }
  // Graph version agrees.
  auto v = nz::orthonormal_penalty(snorm::ad::constant(w), beta);
  CHECK(v.item() == doctest::Approx(term.value).epsilon(1e-14));
}

TEST_CASE("conv kernel reshape") {
  std::vector<double> k1{2.5};
  CHECK(nz::reshape_conv_kernel(k1, {1, 1, 1, 1}) == Matrix(1, 1, 2.5));
  std::vector<double> k{1, 2, 3, 4, 5, 6, 7, 8};
  Matrix m = nz::reshape_conv_kernel(k, {2, 1, 2, 2});
  CHECK(m == Matrix::from_rows({{1, 2, 3, 4}, {5, 6, 7, 8}}));
  CHECK(nz::unreshape_conv_kernel(m, {2, 1, 2, 2}) == k);
  CHECK_THROWS_AS(nz::reshape_conv_kernel(k, {3, 1, 2, 2}), snorm::ShapeError);
}

TEST_CASE("general_norm_gradient") {
  Rng rng(12);
  Matrix w = Matrix::gaussian(4, 3, rng);
  Matrix w_bar = nz::apply_frobenius(w);
  SUBCASE("zero upstream") {
    auto g = nz::general_norm_gradient(w, w_bar, Matrix(4, 3), nz::Frobenius{});
    CHECK(la::max_abs(g.gradient) == 0.0);
  }
  SUBCASE("frobenius vs finite differences") {
    Matrix c = Matrix::gaussian(4, 3, rng);
    auto loss = [&](const Matrix& x) { return la::dot(c.values(), nz::apply_frobenius(x).values()); };
    auto g = nz::general_norm_gradient(w, w_bar, c, nz::Frobenius{});
    const double h = 1e-5;
    for (std::size_t k = 0; k < w.size(); ++k) {
      Matrix up = w, down = w;
      up.values()[k] += h;
      down.values()[k] -= h;
      const double fd = (loss(up) - loss(down)) / (2 * h);
      const double a = g.gradient.values()[k];
      CHECK(std::abs(a - fd) / std::max(std::abs(a), std::abs(fd)) <= 1e-4);
    }
  }
  SUBCASE("lambda positive for aligned delta and W_bar h") {
    auto st = la::spectral_norm(w, la::make_spectral_state(4, 3, rng), 200, rng).state;
    auto sn = nz::apply_spectral(w, st, 1, rng);
    for (int t = 0; t < 20; ++t) {
      auto hvec = la::random_unit_vector(3, rng);
      auto wh = la::matvec(sn.weight, hvec);
      // Upstream G = delta h^T with delta = W_bar h gives lambda = |W_bar h|^2 > 0.
      Matrix upstream = la::outer(wh, hvec);
      auto g = nz::general_norm_gradient(w, sn.weight, upstream, nz::Spectral{}, &sn.state);
      CHECK(g.lambda > 0.0);
    }
  }
  CHECK_THROWS_AS(nz::general_norm_gradient(w, w_bar, w, nz::WeightNorm{}), snorm::DomainError);
  CHECK_THROWS_AS(nz::general_norm_gradient(w, w_bar, w, nz::Spectral{}), snorm::DomainError);
}

TEST_CASE("gradient penalty examples") {
  Rng rng(31);
  Matrix real = Matrix::gaussian(6, 3, rng), fake = Matrix::gaussian(6, 3, rng);
  SUBCASE("unit linear critic gives zero") {
    std::vector<net::LayerSpec> specs{net::dense_layer(3, 1, net::Activation::identity(), {}, false)};
    net::LayerParams p;
    auto w = la::random_unit_vector(3, rng);
    p.weight = Matrix(1, 3, w);
    auto d = net::Network::from_parts(specs, {p});
    CHECK(nz::gradient_penalty(d, real, fake, 10.0, rng).value <= 1e-24);
  }
  SUBCASE("constant critic gives lambda") {
    std::vector<net::LayerSpec> specs{net::dense_layer(3, 1, net::Activation::identity(), {}, true)};
    net::LayerParams p;
    p.weight = Matrix(1, 3);
    p.bias = Matrix(1, 1, 0.3);
    auto d = net::Network::from_parts(specs, {p});
    CHECK(nz::gradient_penalty(d, real, fake, 10.0, rng).value == doctest::Approx(10.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(nz::interpolate(real, Matrix(5, 3), std::vector<double>(6, 0.5)), snorm::ShapeError);
}
