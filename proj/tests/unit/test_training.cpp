#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "snorm/error.hpp"
#include "snorm/metrics/frechet.hpp"
#include "snorm/training/adam.hpp"
#include "snorm/training/gan.hpp"
#include "snorm/training/losses.hpp"
#include "snorm/training/settings.hpp"
#include "snorm/training/toy.hpp"

using snorm::Rng;
using snorm::linalg::Matrix;
namespace tr = snorm::training;
namespace ad = snorm::ad;
namespace nz = snorm::normalizers;

namespace {

// Extended-precision log(1 + e^x) without the stable rewrite.
long double naive_softplus(long double x) { return std::log(1.0L + std::exp(x)); }

tr::GanConfig tiny_config(nz::NormalizerKind kind, const std::string& setting, long updates) {
  tr::GanConfig c;
  c.d_z = 4;
  c.batch_size = 16;
  c.generator_updates = updates;
  c.opt = tr::named_setting(setting);
  c.generator = tr::default_generator(c.d_z, 2, 8, 1);
  c.discriminator = tr::default_discriminator(2, kind, 8, 1);
  c.cadence = 3;
  c.fake_samples = 200;
  c.real_samples = 400;
  return c;
}

}  // namespace

TEST_CASE("named settings") {
  const auto a = tr::named_setting("A");
  CHECK(a.adam.alpha == 0.0001);
  CHECK(a.adam.beta1 == 0.5);
  CHECK(a.adam.beta2 == 0.9);
  CHECK(a.n_dis == 5);
  const auto b = tr::named_setting("B");
  CHECK((b.adam.alpha == 0.0001 && b.adam.beta1 == 0.5 && b.adam.beta2 == 0.999 && b.n_dis == 1));
  const auto c = tr::named_setting("C");
  CHECK((c.adam.alpha == 0.0002 && c.adam.beta1 == 0.5 && c.adam.beta2 == 0.999 && c.n_dis == 1));
  const auto d = tr::named_setting("D");
  CHECK((d.adam.alpha == 0.001 && d.adam.beta1 == 0.5 && d.adam.beta2 == 0.9 && d.n_dis == 5));
  const auto e = tr::named_setting("E");
  CHECK((e.adam.alpha == 0.001 && e.adam.beta1 == 0.5 && e.adam.beta2 == 0.999 && e.n_dis == 5));
  const auto f = tr::named_setting("F");
  CHECK((f.adam.alpha == 0.001 && f.adam.beta1 == 0.9 && f.adam.beta2 == 0.999 && f.n_dis == 5));
  CHECK(tr::all_settings().size() == 6);
  CHECK(a.adam.epsilon == 1e-8);
  CHECK_THROWS_AS(tr::named_setting("G"), snorm::DomainError);
}

TEST_CASE("standard discriminator loss") {
  const std::vector<double> zero{0.0, 0.0};
  CHECK(tr::loss_discriminator_standard(zero, zero) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-15));
  const std::vector<double> real{30.0, 30.0}, fake{-30.0, -30.0};
  CHECK(tr::loss_discriminator_standard(real, fake) <= 1e-9);
  Rng rng(3);
  std::normal_distribution<double> nd(0.0, 4.0);
  std::vector<double> r(50), f(50);
  for (auto& x : r) x = nd(rng);
  for (auto& x : f) x = nd(rng);
  long double oracle = 0;
  for (double x : r) oracle += naive_softplus(-x) / r.size();
  for (double x : f) oracle += naive_softplus(x) / f.size();
  CHECK(std::abs(tr::loss_discriminator_standard(r, f) - static_cast<double>(oracle)) <= 1e-10);
  const std::vector<double> huge{1e4, -1e4};
  CHECK(std::isfinite(tr::loss_discriminator_standard(huge, huge)));
  CHECK(tr::loss_discriminator_standard(huge, huge) == doctest::Approx(1e4));
  CHECK_THROWS_AS(tr::loss_discriminator_standard({}, zero), snorm::DomainError);
}

TEST_CASE("alternate generator loss") {
  const std::vector<double> zero{0.0};
  CHECK(tr::loss_generator_alternate(zero) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const std::vector<double> big{1e4};
  CHECK(tr::loss_generator_alternate(big) == 0.0);
  CHECK(std::isfinite(tr::loss_generator_alternate(std::vector<double>{-1e4})));
  // Decreasing in the logit: descending the loss pushes logits up.
  const double h = 1e-6, x = 0.3;
  const double slope = (tr::loss_generator_alternate(std::vector<double>{x + h}) -
                        tr::loss_generator_alternate(std::vector<double>{x - h})) / (2 * h);
  CHECK(slope < 0.0);
}

TEST_CASE("hinge losses") {
  CHECK(tr::loss_hinge_d(std::vector<double>{2.0}, std::vector<double>{-2.0}) == 0.0);
  CHECK(tr::loss_hinge_d(std::vector<double>{0.5}, std::vector<double>{-0.5}) == doctest::Approx(-1.0));
  CHECK(tr::loss_hinge_g(std::vector<double>{3.0}) == -3.0);
  Rng rng(8);
  std::normal_distribution<double> nd(0.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> r(5), f(5);
    for (auto& x : r) x = nd(rng);
    for (auto& x : f) x = nd(rng);
    const double v = tr::loss_hinge_d(r, f);
    CHECK(v <= 0.0);
    bool inactive = true;
    for (double x : r) inactive = inactive && x >= 1.0;
    for (double x : f) inactive = inactive && x <= -1.0;
    CHECK((v == 0.0) == inactive);
  }
}

TEST_CASE("wgan loss") {
  const std::vector<double> c{0.7, 0.7};
  CHECK(tr::loss_wgan(c, c) == 0.0);
  CHECK(tr::loss_wgan(std::vector<double>{2.0}, std::vector<double>{-1.0}) == 3.0);
}

TEST_CASE("graph objectives agree with scalar losses") {
  Rng rng(4);
  Matrix r = Matrix::gaussian(6, 1, rng) * 3.0, f = Matrix::gaussian(6, 1, rng) * 3.0;
  auto obj = [&](const tr::LossKind& k) {
    return tr::discriminator_objective(k, ad::constant(r), ad::constant(f)).item();
  };
  CHECK(obj(tr::StandardAlternate{}) == doctest::Approx(tr::loss_discriminator_standard(r.values(), f.values())).epsilon(1e-14));
  CHECK(obj(tr::Hinge{}) == doctest::Approx(-tr::loss_hinge_d(r.values(), f.values())).epsilon(1e-14));
  CHECK(obj(tr::Wgan{}) == doctest::Approx(-tr::loss_wgan(r.values(), f.values())).epsilon(1e-14));
  CHECK(tr::generator_objective(tr::StandardAlternate{}, ad::constant(f)).item() ==
        doctest::Approx(tr::loss_generator_alternate(f.values())).epsilon(1e-14));
  CHECK(tr::generator_objective(tr::Hinge{}, ad::constant(f)).item() ==
        doctest::Approx(tr::loss_hinge_g(f.values())).epsilon(1e-14));
  Matrix huge(2, 1, std::vector<double>{1e4, -1e4});
  CHECK(std::isfinite(tr::discriminator_objective(tr::StandardAlternate{}, ad::constant(huge), ad::constant(huge)).item()));
  CHECK_THROWS_AS(tr::validate(tr::WganGp{-1.0}), snorm::DomainError);
}

TEST_CASE("adam") {
  tr::AdamConfig cfg{1e-3, 0.5, 0.9, 1e-8};
  SUBCASE("zero gradient leaves parameters unchanged") {
    Matrix p(2, 2, 1.5);
    Matrix* ps[] = {&p};
    const Matrix g[] = {Matrix(2, 2)};
    tr::AdamMoments m;
    for (long t = 1; t <= 5; ++t) tr::adam_step(ps, g, m, cfg, t);
    CHECK(p == Matrix(2, 2, 1.5));
  }
  SUBCASE("constant gradient moves by about alpha per step") {
    Matrix p(1, 1, 0.0);
    Matrix* ps[] = {&p};
    const Matrix g[] = {Matrix(1, 1, 0.37)};
    tr::AdamMoments m;
    double prev = 0;
    for (long t = 1; t <= 200; ++t) {
      tr::adam_step(ps, g, m, cfg, t);
      CHECK(std::abs(std::abs(p(0, 0) - prev) - cfg.alpha) <= 1e-6);
      prev = p(0, 0);
    }
  }
  SUBCASE("matches a scalar reference over 100 steps") {
    Rng rng(5);
    Matrix p = Matrix::gaussian(3, 2, rng);
    std::vector<double> ref(p.values().begin(), p.values().end());
    std::vector<double> m(ref.size(), 0.0), v(ref.size(), 0.0);
    Matrix* ps[] = {&p};
    tr::AdamMoments moments;
    for (long t = 1; t <= 100; ++t) {
      Matrix g = Matrix::gaussian(3, 2, rng);
      const Matrix gs[] = {g};
      tr::adam_step(ps, gs, moments, cfg, t);
      for (std::size_t i = 0; i < ref.size(); ++i) {
        const double gi = g.values()[i];
        m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * gi;
        v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * gi * gi;
        const double mh = m[i] / (1 - std::pow(cfg.beta1, t));
        const double vh = v[i] / (1 - std::pow(cfg.beta2, t));
        ref[i] -= cfg.alpha * mh / (std::sqrt(vh) + cfg.epsilon);
      }
    }
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(p.values()[i] - ref[i]) <= 1e-12);
  }
  Matrix p(1, 1);
  Matrix* ps[] = {&p};
  const Matrix g[] = {Matrix(1, 1)};
  tr::AdamMoments m;
  CHECK_THROWS_AS(tr::adam_step(ps, g, m, cfg, 0), snorm::DomainError);
  CHECK_THROWS_AS(tr::validate(tr::AdamConfig{0.0, 0.5, 0.9, 1e-8}), snorm::DomainError);
  CHECK_THROWS_AS(tr::validate(tr::AdamConfig{1e-3, 1.0, 0.9, 1e-8}), snorm::DomainError);
}

TEST_CASE("toy targets") {
  SUBCASE("ring samples sit near a center") {
    tr::GaussianRing ring;
    Rng rng(12);
    auto s = tr::sample_toy(ring, 5000, rng);
    const Matrix centers = tr::mode_centers(ring);
    CHECK(centers.rows() == 8);
    std::size_t near = 0;
    for (std::size_t i = 0; i < s.samples.rows(); ++i) {
      for (std::size_t k = 0; k < centers.rows(); ++k) {
        const double dx = s.samples(i, 0) - centers(k, 0), dy = s.samples(i, 1) - centers(k, 1);
        if (std::sqrt(dx * dx + dy * dy) <= 4 * ring.sigma) {
          ++near;
          break;
        }
      }
    }
    CHECK(static_cast<double>(near) >= 0.99 * 5000);
  }
  SUBCASE("empty and reproducible") {
    Rng rng(1);
    CHECK(tr::sample_toy(tr::GaussianGrid{}, 0, rng).samples.rows() == 0);
    Rng a(9), b(9);
    CHECK(tr::sample_toy(tr::LowDimManifold{}, 30, a).samples == tr::sample_toy(tr::LowDimManifold{}, 30, b).samples);
  }
  CHECK(tr::data_dim(tr::GaussianGrid{}) == 2);
  CHECK(tr::mode_centers(tr::GaussianGrid{}).rows() == 25);
  CHECK(tr::data_dim(tr::LowDimManifold{}) == 8);
  CHECK_THROWS_AS(tr::validate(tr::GaussianRing{0, 2.0, 0.05}), snorm::DomainError);
  CHECK_THROWS_AS(tr::validate(tr::GaussianRing{8, 2.0, 0.0}), snorm::DomainError);
}

TEST_CASE("train_gan") {
  SUBCASE("zero updates gives the initial record only") {
    tr::MemorySink sink;
    tr::MetricSink* sinks[] = {&sink};
    auto report = tr::train_gan(tiny_config(nz::Spectral{1}, "C", 0), sinks);
    CHECK(report.generator_updates == 0);
    CHECK(report.discriminator_updates == 0);
    REQUIRE(sink.records().size() == 1);
    CHECK(sink.records()[0].iter == 0);
    CHECK(sink.records()[0].sigma.size() == 2);
  }
  SUBCASE("alternation count and cadence") {
    tr::MemorySink sink;
    tr::MetricSink* sinks[] = {&sink};
    auto report = tr::train_gan(tiny_config(nz::Spectral{1}, "A", 7), sinks);
    CHECK(report.generator_updates == 7);
    CHECK(report.discriminator_updates == 35);
    std::vector<long> iters;
    for (const auto& r : sink.records()) iters.push_back(r.iter);
    CHECK(iters == std::vector<long>{0, 3, 6, 7});
    CHECK_FALSE(report.collapsed);
    CHECK(report.final_metrics == sink.records().back());
  }
  SUBCASE("deterministic for a seed") {
    for (auto kind : {nz::NormalizerKind{nz::Spectral{1}}, nz::NormalizerKind{nz::Clip{0.01}}}) {
      auto cfg = tiny_config(kind, "C", 6);
      cfg.loss = tr::WganGp{10.0};
      tr::MemorySink a, b;
      tr::MetricSink* sa[] = {&a};
      tr::MetricSink* sb[] = {&b};
      auto ra = tr::train_gan(cfg, sa);
      auto rb = tr::train_gan(cfg, sb);
      CHECK(a.records() == b.records());
      CHECK(ra.discriminator == rb.discriminator);
      CHECK(ra.generator == rb.generator);
    }
  }
  SUBCASE("collapse is reported") {
    auto cfg = tiny_config(nz::NoNormalizer{}, "C", 5);
    cfg.opt.adam.alpha = 1e300;
    tr::MemorySink sink;
    tr::MetricSink* sinks[] = {&sink};
    auto report = tr::train_gan(cfg, sinks);
    CHECK(report.collapsed);
    CHECK_FALSE(report.collapse_reason.empty());
    CHECK(std::isnan(sink.records().back().frechet));
  }
  SUBCASE("invalid configs") {
    auto cfg = tiny_config(nz::Spectral{1}, "C", 1);
    cfg.batch_size = 0;
    CHECK_THROWS_AS(tr::validate(cfg), snorm::ConfigError);
    cfg = tiny_config(nz::Spectral{1}, "C", 1);
    cfg.discriminator = tr::default_discriminator(3, nz::Spectral{1});
    CHECK_THROWS_AS(tr::validate(cfg), snorm::ConfigError);
  }
}
