#include <cmath>
#include <random>

#include "doctest.h"
#include "snorm/error.hpp"
#include "snorm/linalg/decompositions.hpp"
#include "snorm/linalg/matrix.hpp"
#include "snorm/linalg/power_iteration.hpp"

using snorm::Rng;
using snorm::linalg::Matrix;
namespace la = snorm::linalg;

namespace {

double orthogonality_error(const Matrix& q) {
  Matrix g = la::matmul_tn(q, q);
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
  return la::max_abs(g);
}

Matrix reconstruct(const la::SvdResult& r) {
  Matrix us = r.u;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= r.s[j];
  return la::matmul_nt(us, r.v);
}

}  // namespace

TEST_CASE("matrix construction and arithmetic") {
  Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  CHECK(a(1, 0) == 3);
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), snorm::ShapeError);
  Matrix b = la::matmul(a, Matrix::identity(2));
  CHECK(b == a);
  CHECK(la::matmul_tn(a, a) == la::matmul(la::transpose(a), a));
  CHECK(la::matmul_nt(a, a) == la::matmul(a, la::transpose(a)));
  CHECK(la::trace(a) == 5);
  CHECK_THROWS_AS(la::matmul(a, Matrix(3, 1)), snorm::ShapeError);
}

TEST_CASE("frobenius norm") {
  CHECK(la::frobenius_norm(Matrix::identity(3)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(la::frobenius_norm(Matrix::from_rows({{3, 4}})) == 5.0);
  Rng rng(7);
  Matrix w = Matrix::gaussian(9, 5, rng);
  double s2 = 0;
  for (double s : la::singular_values(w)) s2 += s * s;
  CHECK(std::abs(la::frobenius_norm(w) - std::sqrt(s2)) <= 1e-10);
}

TEST_CASE("svd oracle") {
  SUBCASE("identity") {
    auto r = la::svd_oracle(Matrix::identity(3));
    for (double s : r.s) CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("diagonal") {
    auto s = la::singular_values(Matrix::diagonal(std::vector<double>{1, 3}));
    CHECK(s[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(s[1] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("random 32x32 orthogonality and reconstruction") {
    Rng rng(11);
    Matrix a = Matrix::gaussian(32, 32, rng);
    auto r = la::svd_oracle(a);
    CHECK(orthogonality_error(r.u) <= 1e-10);
    CHECK(orthogonality_error(r.v) <= 1e-10);
    CHECK(la::frobenius_norm(reconstruct(r) - a) <= 1e-10 * std::max(1.0, la::frobenius_norm(a)));
    for (std::size_t i = 1; i < r.s.size(); ++i) CHECK(r.s[i - 1] >= r.s[i]);
  }
  SUBCASE("wide and rank deficient") {
    Rng rng(3);
    Matrix u = Matrix::gaussian(6, 1, rng), v = Matrix::gaussian(1, 9, rng);
    Matrix a = la::matmul(u, v);
    auto r = la::svd_oracle(a);
    CHECK(r.u.rows() == 6);
    CHECK(r.v.rows() == 9);
    CHECK(orthogonality_error(r.u) <= 1e-10);
    CHECK(orthogonality_error(r.v) <= 1e-10);
    CHECK(la::frobenius_norm(reconstruct(r) - a) <= 1e-10 * la::frobenius_norm(a));
    CHECK(r.s[1] <= 1e-12);
  }
  SUBCASE("zero matrix") {
    auto r = la::svd_oracle(Matrix(4, 3));
    for (double s : r.s) CHECK(s == 0.0);
    CHECK(orthogonality_error(r.u) <= 1e-12);
  }
  CHECK_THROWS_AS(la::svd_oracle(Matrix(2, 2, std::nan(""))), snorm::DomainError);
}

TEST_CASE("symmetric eigen") {
  Rng rng(5);
  Matrix b = Matrix::gaussian(7, 7, rng);
  Matrix a = la::matmul_tn(b, b);
  auto e = la::symmetric_eigen(a);
  CHECK(orthogonality_error(e.vectors) <= 1e-10);
  Matrix av = la::matmul(a, e.vectors);
  for (std::size_t j = 0; j < 7; ++j)
    for (std::size_t i = 0; i < 7; ++i)
      CHECK(std::abs(av(i, j) - e.values[j] * e.vectors(i, j)) <= 1e-9);
}

TEST_CASE("power iteration examples") {
  Rng rng(1);
  SUBCASE("identity gives 1 after one step") {
    auto st = la::make_spectral_state(2, 2, rng);
    auto r = la::power_iteration_step(Matrix::identity(2), st, rng);
    CHECK(r.sigma == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("diag(3,1) converges to 3") {
    la::SpectralState st{{1 / std::sqrt(2.0), 1 / std::sqrt(2.0)}, {0, 0}, 0};
    auto r = la::spectral_norm(Matrix::diagonal(std::vector<double>{3, 1}), st, 60, rng);
    CHECK(std::abs(r.sigma - 3.0) <= 1e-9);
  }
  SUBCASE("scaled identity") {
    auto st = la::make_spectral_state(4, 4, rng);
    CHECK(la::spectral_norm(Matrix::identity(4) * 0.5, st, 1, rng).sigma ==
          doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("rank one") {
    std::vector<double> u{2, 0, 0}, v{0, 3, 0, 0};
    auto st = la::make_spectral_state(3, 4, rng);
    CHECK(std::abs(la::spectral_norm(la::outer(u, v), st, 1, rng).sigma - 6.0) <= 1e-9);
  }
  SUBCASE("monotone on a fixed matrix") {
    Matrix w = Matrix::gaussian(20, 12, rng);
    auto st = la::make_spectral_state(20, 12, rng);
    double prev = 0;
    for (int i = 0; i < 50; ++i) {
      auto r = la::power_iteration_step(w, st, rng);
      CHECK(r.sigma >= prev - 1e-12);
      prev = r.sigma;
      st = r.state;
      CHECK(std::abs(la::norm2(st.u_tilde) - 1.0) <= 1e-12);
    }
  }
  SUBCASE("null space restart and zero matrix") {
    Matrix w = Matrix::from_rows({{1, 0}, {0, 0}});
    la::SpectralState st{{0, 1}, {0, 0}, 0};
    auto r = la::power_iteration_step(w, st, rng);
    CHECK(r.sigma == doctest::Approx(1.0));
    CHECK_THROWS_AS(la::power_iteration_step(Matrix(2, 2), st, rng), snorm::ZeroMatrixError);
  }
  CHECK_THROWS_AS(la::spectral_norm(Matrix::identity(2), la::make_spectral_state(2, 2, rng), 0, rng),
                  snorm::DomainError);
  CHECK_THROWS_AS(la::power_iteration_step(Matrix::identity(2), la::make_spectral_state(3, 2, rng), rng),
                  snorm::ShapeError);
}

TEST_CASE("spectral norm properties") {
  Rng rng(99);
  for (int t = 0; t < 20; ++t) {
    Matrix w = Matrix::gaussian(8 + t % 5, 6 + t % 3, rng);
    auto s = la::singular_values(w);
    CHECK(s[0] <= la::frobenius_norm(w) * (1 + 1e-15));
    const double c = -2.5;
    auto sc = la::singular_values(w * c);
    CHECK(std::abs(sc[0] - std::abs(c) * s[0]) <= 1e-10 * sc[0]);
    if ((s[0] - s[1]) / s[0] < 1e-8) continue;
    auto r = la::spectral_norm(w, la::make_spectral_state(w.rows(), w.cols(), rng), 200, rng);
    CHECK(std::abs(r.sigma - s[0]) / s[0] <= 1e-6);
  }
}

TEST_CASE("random orthonormal") {
  Rng rng(4);
  CHECK(orthogonality_error(la::random_orthonormal(8, 5, rng)) <= 1e-12);
  CHECK(orthogonality_error(la::transpose(la::random_orthonormal(3, 7, rng))) <= 1e-12);
}
