#pragma once

#include <span>
#include <string>
#include <variant>

#include "snorm/net/autodiff.hpp"

namespace snorm::training {

struct StandardAlternate {
  friend bool operator==(const StandardAlternate&, const StandardAlternate&) = default;
};
struct Hinge {
  friend bool operator==(const Hinge&, const Hinge&) = default;
};
struct Wgan {
  friend bool operator==(const Wgan&, const Wgan&) = default;
};
struct WganGp {
  double lambda = 10.0;
  friend bool operator==(const WganGp&, const WganGp&) = default;
};

using LossKind = std::variant<StandardAlternate, Hinge, Wgan, WganGp>;

std::string loss_name(const LossKind& kind);
void validate(const LossKind& kind);

// Scalar forms over raw discriminator outputs (logits for the standard loss).

/// -E[log sigmoid(d_real)] - E[log(1 - sigmoid(d_fake))]; minimized by D.
double loss_discriminator_standard(std::span<const double> d_real, std::span<const double> d_fake);
/// -E[log sigmoid(d_fake)]; minimized by G.
double loss_generator_alternate(std::span<const double> d_fake);
/// V_D = E[min(0, -1 + d_real)] + E[min(0, -1 - d_fake)]; D maximizes it.
double loss_hinge_d(std::span<const double> d_real, std::span<const double> d_fake);
/// -E[d_fake]; minimized by G.
double loss_hinge_g(std::span<const double> d_fake);
/// E[d_real] - E[d_fake]; the critic maximizes it.
double loss_wgan(std::span<const double> d_real, std::span<const double> d_fake);

// Graph forms, each returning the quantity that gets minimized.

/// Discriminator objective without any gradient penalty term.
ad::Var discriminator_objective(const LossKind& kind, const ad::Var& d_real, const ad::Var& d_fake);
ad::Var generator_objective(const LossKind& kind, const ad::Var& d_fake);

}  // namespace snorm::training
