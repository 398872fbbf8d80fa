#include "snorm/training/losses.hpp"

#include <algorithm>
#include <cmath>

#include "snorm/error.hpp"
#include "snorm/overloaded.hpp"

namespace snorm::training {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double mean(std::span<const double> v) {
  if (v.empty()) throw DomainError("loss: empty batch");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

template <class F>
double mean_of(std::span<const double> v, F f) {
  if (v.empty()) throw DomainError("loss: empty batch");
  double s = 0.0;
  for (double x : v) s += f(x);
  return s / static_cast<double>(v.size());
}

}  // namespace

std::string loss_name(const LossKind& kind) {
  return std::visit(overloaded{
                        [](const StandardAlternate&) { return std::string("standard"); },
                        [](const Hinge&) { return std::string("hinge"); },
                        [](const Wgan&) { return std::string("wgan"); },
                        [](const WganGp&) { return std::string("wgan_gp"); },
                    },
                    kind);
}

void validate(const LossKind& kind) {
  if (const auto* gp = std::get_if<WganGp>(&kind); gp && !(gp->lambda >= 0.0)) {
    throw DomainError("wgan_gp: lambda must be >= 0");
  }
}

double loss_discriminator_standard(std::span<const double> d_real, std::span<const double> d_fake) {
  return mean_of(d_real, [](double x) { return softplus(-x); }) +
         mean_of(d_fake, [](double x) { return softplus(x); });
}

double loss_generator_alternate(std::span<const double> d_fake) {
  return mean_of(d_fake, [](double x) { return softplus(-x); });
}

double loss_hinge_d(std::span<const double> d_real, std::span<const double> d_fake) {
  return mean_of(d_real, [](double x) { return std::min(0.0, -1.0 + x); }) +
         mean_of(d_fake, [](double x) { return std::min(0.0, -1.0 - x); });
}

double loss_hinge_g(std::span<const double> d_fake) { return -mean(d_fake); }

double loss_wgan(std::span<const double> d_real, std::span<const double> d_fake) {
  return mean(d_real) - mean(d_fake);
}

ad::Var discriminator_objective(const LossKind& kind, const ad::Var& d_real, const ad::Var& d_fake) {
  return std::visit(
      overloaded{
          [&](const StandardAlternate&) {
            return ad::add(ad::mean(ad::softplus(ad::neg(d_real))), ad::mean(ad::softplus(d_fake)));
          },
          [&](const Hinge&) {
            // -V_D = E[relu(1 - d_real)] + E[relu(1 + d_fake)]
            return ad::add(ad::mean(ad::relu(ad::add_scalar(ad::neg(d_real), 1.0))),
                           ad::mean(ad::relu(ad::add_scalar(d_fake, 1.0))));
          },
          [&](const auto&) { return ad::sub(ad::mean(d_fake), ad::mean(d_real)); },
      },
      kind);
}

ad::Var generator_objective(const LossKind& kind, const ad::Var& d_fake) {
  if (std::holds_alternative<StandardAlternate>(kind)) {
    return ad::mean(ad::softplus(ad::neg(d_fake)));
  }
  return ad::neg(ad::mean(d_fake));
}

}  // namespace snorm::training
