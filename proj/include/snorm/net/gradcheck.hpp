#pragma once

#include <functional>
#include <string>
#include <vector>

#include "snorm/net/network.hpp"

namespace snorm::net {

/// Scalar (1x1) loss of a bound network.
using LossFn = std::function<ad::Var(const BoundNetwork&)>;

struct GradCheckOptions {
  double tolerance = 1e-4;
  double step = 1e-5;
  /// Coordinates whose analytic gradient is at most this are not compared.
  double grad_floor = 1e-8;
  /// Power steps run on a copy of each spectral state before checking.
  int warmup_power_steps = 1000;
  /// Power steps per loss evaluation, starting from the warmed state.
  int eval_power_steps = 50;
  /// Negative control: drop the normalizer's scale gradient from the analytic side.
  bool inject_fault = false;
};

struct TensorCheck {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t compared = 0;
  std::size_t below_floor = 0;
};

struct GradCheckReport {
  bool skipped = false;
  std::string skip_reason;
  std::vector<TensorCheck> tensors;
  double max_rel_error = 0.0;
  double tolerance = 0.0;

  bool passed() const { return skipped || max_rel_error <= tolerance; }
};

/// Compares reverse-mode gradients with central differences on every raw
/// parameter coordinate. Relative error is |a - f| / max(|a|, |f|).
/// A network with a zero weight in a norm-dividing layer is reported skipped.
GradCheckReport finite_difference_check(const Network& net, const LossFn& loss,
                                        const GradCheckOptions& options = {});

}  // namespace snorm::net
