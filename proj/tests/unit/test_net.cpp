#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "snorm/error.hpp"
#include "snorm/linalg/decompositions.hpp"
#include "snorm/net/checkpoint.hpp"
#include "snorm/net/gradcheck.hpp"
#include "snorm/net/lipschitz.hpp"
#include "snorm/net/network.hpp"
#include "snorm/net/serialize.hpp"
#include "snorm/normalizers/normalize.hpp"

using snorm::Rng;
using snorm::linalg::Matrix;
namespace la = snorm::linalg;
namespace nz = snorm::normalizers;
namespace ad = snorm::ad;
using namespace snorm::net;

namespace {

Network single_layer(const Matrix& w, Activation act, nz::NormalizerKind norm = {}) {
  std::vector<LayerSpec> specs{dense_layer(w.cols(), w.rows(), act, norm, false)};
  LayerParams p;
  p.weight = w;
  if (std::holds_alternative<nz::Spectral>(norm)) {
    p.spectral.u_tilde = std::vector<double>(w.rows(), 0.0);
    p.spectral.u_tilde[0] = 1.0;
    p.spectral.v_tilde = std::vector<double>(w.cols(), 0.0);
  }
  return Network::from_parts(specs, {p});
}

ad::Var squared_output_loss(const BoundNetwork& b, const Matrix& x) {
  return ad::mean(ad::square(b.forward(ad::constant(x))));
}

}  // namespace

TEST_CASE("forward examples") {
  Rng rng(1);
  Matrix x = Matrix::gaussian(4, 3, rng);
  CHECK(predict(single_layer(Matrix::identity(3), Activation::identity()), x) == x);
  CHECK(predict(single_layer(Matrix(1, 1, 2.0), Activation::relu()), Matrix(1, 1, -1.0))(0, 0) == 0.0);
  CHECK_THROWS_AS(predict(single_layer(Matrix::identity(3), Activation::identity()), Matrix(2, 2)),
                  snorm::ShapeError);
}

TEST_CASE("two-layer composition oracle") {
  Rng rng(2);
  std::vector<LayerSpec> specs{dense_layer(3, 5, Activation::leaky_relu(0.1)),
                               dense_layer(5, 2, Activation::identity())};
  Network n(specs, rng);
  n.layer(0).bias = Matrix::gaussian(1, 5, rng);
  n.layer(1).bias = Matrix::gaussian(1, 2, rng);
  Matrix x = Matrix::gaussian(6, 3, rng);
  Matrix h = la::matmul_nt(x, n.layer(0).weight);
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = 0; j < h.cols(); ++j) {
      h(i, j) += n.layer(0).bias(0, j);
      if (h(i, j) < 0) h(i, j) *= 0.1;
    }
  Matrix y = la::matmul_nt(h, n.layer(1).weight);
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += n.layer(1).bias(0, j);
  CHECK(la::max_abs(predict(n, x) - y) <= 1e-12);
}

TEST_CASE("conv layer matches direct convolution") {
  Rng rng(3);
  Conv2d c{2, 3, 3, 2, 2, 1, 5, 4};
  LayerSpec spec{c, Activation::identity(), {}, true};
  Network n({spec}, rng);
  n.layer(0).bias = Matrix::gaussian(1, 3, rng);
  const std::size_t batch = 2;
  Matrix x = Matrix::gaussian(batch, 2 * 5 * 4, rng);
  Matrix out = predict(n, x);
  const std::size_t oh = c.out_height(), ow = c.out_width();
  REQUIRE(out.cols() == 3 * oh * ow);
  auto kernel = nz::unreshape_conv_kernel(n.layer(0).weight, {3, 2, 3, 2});
  double worst = 0;
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t co = 0; co < 3; ++co)
      for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox) {
          double acc = n.layer(0).bias(0, co);
          for (std::size_t ci = 0; ci < 2; ++ci)
            for (std::size_t ky = 0; ky < 3; ++ky)
              for (std::size_t kx = 0; kx < 2; ++kx) {
                const long y = static_cast<long>(oy * 2 + ky) - 1;
                const long xx = static_cast<long>(ox * 2 + kx) - 1;
                if (y < 0 || xx < 0 || y >= 5 || xx >= 4) continue;
                acc += kernel[((co * 2 + ci) * 3 + ky) * 2 + kx] *
                       x(s, (ci * 5 + static_cast<std::size_t>(y)) * 4 + static_cast<std::size_t>(xx));
              }
          worst = std::max(worst, std::abs(acc - out(s, (co * oh + oy) * ow + ox)));
        }
  CHECK(worst <= 1e-12);
}

TEST_CASE("backward examples") {
  Rng rng(4);
  SUBCASE("scalar weight through spectral normalization has zero gradient") {
    for (double w : {0.3, -2.0, 7.5}) {
      Network n = single_layer(Matrix(1, 1, w), Activation::identity(), nz::Spectral{1});
      ForwardPass pass = forward(n, Matrix::gaussian(5, 1, rng), rng);
      auto g = pass.backward(Matrix::gaussian(5, 1, rng));
      CHECK(std::abs(g.tensors[0](0, 0)) <= 1e-15);
    }
  }
  SUBCASE("no normalizer equals plain reverse mode") {
    Matrix w = Matrix::gaussian(2, 3, rng);
    Network n = single_layer(w, Activation::identity());
    Matrix x = Matrix::gaussian(4, 3, rng), up = Matrix::gaussian(4, 2, rng);
    auto g = forward(n, x).backward(up);
    CHECK(la::max_abs(g.tensors[0] - la::matmul_tn(up, x)) <= 1e-14);
    CHECK(la::max_abs(forward(n, x).input_gradient(up) - la::matmul(up, w)) <= 1e-14);
  }
  SUBCASE("spectral backward equals general_norm_gradient") {
    Matrix w = Matrix::gaussian(4, 3, rng);
    Network n = single_layer(w, Activation::identity(), nz::Spectral{1});
    Matrix x = Matrix::gaussian(6, 3, rng), up = Matrix::gaussian(6, 4, rng);
    ForwardPass pass = forward(n, x, rng);
    auto g = pass.backward(up);
    const auto& st = n.layer(0).spectral;
    Matrix w_bar = w * (1.0 / la::dot(st.u_tilde, la::matvec(w, st.v_tilde)));
    auto ref = nz::general_norm_gradient(w, w_bar, la::matmul_tn(up, x), nz::Spectral{}, &st);
    CHECK(la::max_abs(g.tensors[0] - ref.gradient) <= 1e-10);
  }
  CHECK_THROWS(ForwardPass{}.backward(Matrix(1, 1)));
}

TEST_CASE("spectral state cadence") {
  Rng rng(5);
  Network n({dense_layer(3, 4, Activation::relu(), nz::Spectral{1})}, rng);
  const Network before = n;
  Matrix x = Matrix::gaussian(2, 3, rng);
  predict(n, x);
  forward(static_cast<const Network&>(n), x);
  effective_weights(n, 100);
  CHECK(n == before);
  forward(n, x, rng);
  CHECK_FALSE(n.layer(0).spectral == before.layer(0).spectral);
  CHECK_THROWS(bind(static_cast<const Network&>(n), BindOptions{SpectralUpdate::persist}));
}

TEST_CASE("forward determinism") {
  auto run = [] {
    Rng rng(77);
    Network n({dense_layer(2, 8, Activation::leaky_relu(), nz::Spectral{1}),
               dense_layer(8, 1, Activation::identity(), nz::Spectral{1})},
              rng);
    Matrix x = Matrix::gaussian(5, 2, rng);
    forward(n, x, rng);
    return forward(n, x, rng).output();
  };
  CHECK(run() == run());
}

TEST_CASE("finite-difference check for every normalizer kind") {
  const std::vector<nz::NormalizerKind> kinds{
      nz::NoNormalizer{}, nz::Spectral{1}, nz::SpectralReparam{1.3, 1}, nz::WeightNorm{},
      nz::Frobenius{},    nz::Clip{0.5},   nz::Orthonormal{0.1}};
  for (const auto& kind : kinds) {
    CAPTURE(nz::describe(kind));
    Rng rng(40);
    Network n({dense_layer(3, 5, Activation::tanh(), kind), dense_layer(5, 4, Activation::leaky_relu(), kind),
               dense_layer(4, 1, Activation::identity(), kind)},
              rng);
    Matrix x = Matrix::gaussian(7, 3, rng);
    auto report = finite_difference_check(n, [&](const BoundNetwork& b) {
      return ad::add(squared_output_loss(b, x), b.penalty());
    });
    CHECK_FALSE(report.skipped);
    CHECK(report.tensors.size() == n.parameters().size());
    CHECK(report.max_rel_error <= 1e-4);
  }
}

TEST_CASE("finite-difference check edge cases") {
  Rng rng(41);
  Network n({dense_layer(3, 3, Activation::relu(), nz::Spectral{1}),
             dense_layer(3, 1, Activation::identity(), nz::Spectral{1})},
            rng);
  Matrix x = Matrix::gaussian(4, 3, rng);
  auto loss = [&](const BoundNetwork& b) { return squared_output_loss(b, x); };
  GradCheckOptions fault;
  fault.inject_fault = true;
  CHECK_FALSE(finite_difference_check(n, loss, fault).passed());

  n.layer(0).weight = Matrix(3, 3);
  auto skipped = finite_difference_check(n, loss);
  CHECK(skipped.skipped);
  CHECK(skipped.passed());
}

TEST_CASE("fixed point of the spectral gradient") {
  Rng rng(6);
  Network n = single_layer(Matrix::gaussian(4, 3, rng), Activation::identity(), nz::Spectral{1});
  const BoundNetwork b = bind(n, rng, BindOptions{SpectralUpdate::persist});
  const auto& st = b.spectral_states()[0];
  // One sample with h = v and delta = k u gives E[delta h^T] = k u v^T.
  const double k = 2.75;
  const Matrix x(1, 3, st.v_tilde);
  const Matrix up = Matrix(1, 4, st.u_tilde) * k;
  const ad::Var out = b.forward(ad::constant(x));
  const ad::Var w[] = {b.parameters()[0]};
  CHECK(la::frobenius_norm(ad::grad(out, w, up)[0].value()) <= 1e-8);
}

TEST_CASE("lipschitz upper bound examples") {
  Rng rng(7);
  CHECK(lipschitz_upper_bound(single_layer(Matrix::diagonal(std::vector<double>{3, 1}), Activation::relu())) ==
        doctest::Approx(3.0).epsilon(1e-14));
  std::vector<LayerSpec> specs{dense_layer(2, 2, Activation::relu(), {}, false),
                               dense_layer(2, 2, Activation::identity(), {}, false)};
  LayerParams a, b;
  a.weight = Matrix::diagonal(std::vector<double>{2, 1});
  b.weight = Matrix::diagonal(std::vector<double>{1, 5});
  CHECK(lipschitz_upper_bound(Network::from_parts(specs, {a, b})) == doctest::Approx(10.0).epsilon(1e-14));

  Network sn({dense_layer(4, 6, Activation::leaky_relu(), nz::Spectral{1}),
              dense_layer(6, 1, Activation::identity(), nz::Spectral{1})},
             rng);
  CHECK(std::abs(lipschitz_upper_bound(sn, 1000) - 1.0) <= 1e-6);

  Network wide({LayerSpec{Dense{2, 2}, Activation{ActivationKind::leaky_relu, 0.1}, {}, true}}, rng);
  wide.layer(0).weight = Matrix::identity(2);
  CHECK_NOTHROW(lipschitz_upper_bound(wide));
}

TEST_CASE("empirical lipschitz") {
  Rng rng(8);
  Matrix x = Matrix::gaussian(50, 3, rng), y = Matrix::gaussian(50, 3, rng);
  CHECK(empirical_lipschitz(single_layer(Matrix::identity(3), Activation::identity()), x, y) ==
        doctest::Approx(1.0).epsilon(1e-14));
  Matrix p(1, 1, 1.0), q(1, 1, 3.0);
  CHECK(empirical_lipschitz(single_layer(Matrix(1, 1, 2.0), Activation::relu()), p, q) == doctest::Approx(2.0));
  CHECK_THROWS_AS(empirical_lipschitz(single_layer(Matrix::identity(3), Activation::identity()), x, x),
                  snorm::DomainError);

  Network n({dense_layer(3, 8, Activation::relu()), dense_layer(8, 8, Activation::leaky_relu()),
             dense_layer(8, 2, Activation::identity())},
            rng);
  CHECK(empirical_lipschitz(n, x, y) <= lipschitz_upper_bound(n) * (1 + 1e-9));
}

TEST_CASE("checkpoint round trip") {
  Rng rng(9);
  Network d({dense_layer(2, 5, Activation::leaky_relu(), nz::Spectral{1}),
             dense_layer(5, 3, Activation::tanh(), nz::SpectralReparam{1.5, 2}),
             dense_layer(3, 1, Activation::identity(), nz::Clip{0.2}, false)},
            rng);
  forward(d, Matrix::gaussian(4, 2, rng), rng);
  Network g({LayerSpec{Conv2d{1, 2, 2, 2, 1, 0, 3, 3}, Activation::relu(), nz::Orthonormal{0.3}, true},
             dense_layer(8, 2, Activation::identity(), nz::WeightNorm{})},
            rng);
  Checkpoint ckpt;
  ckpt.iteration = 42;
  ckpt.rng_state = snorm::io::rng_state(rng);
  ckpt.networks.emplace("discriminator", d);
  ckpt.networks.emplace("generator", g);
  const std::string text = serialize_checkpoint(ckpt);
  Checkpoint back = parse_checkpoint(text);
  CHECK(back == ckpt);
  CHECK(serialize_checkpoint(back) == text);
  Rng restored = snorm::io::rng_from_state(back.rng_state);
  CHECK(restored() == rng());

  auto path = std::filesystem::temp_directory_path() / "snorm_ckpt_test.json";
  save_checkpoint(ckpt, path);
  CHECK(load_checkpoint(path) == ckpt);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(parse_checkpoint("{not json"), snorm::CheckpointError);
  CHECK_THROWS_AS(parse_checkpoint(R"({"format":"other","version":1})"), snorm::CheckpointError);
  std::string truncated = text;
  truncated.replace(truncated.find("\"rows\""), 6, "\"rowz\"");
  CHECK_THROWS_AS(parse_checkpoint(truncated), snorm::CheckpointError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/dir/ckpt.json"), snorm::CheckpointError);
}
