#include "snorm/net/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "snorm/error.hpp"
#include "snorm/normalizers/normalize.hpp"

namespace snorm::net {

namespace {

std::string degenerate_layer(const Network& net) {
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    const auto& kind = net.specs()[i].normalizer;
    if (!normalizers::divides_by_norm(kind)) continue;
    const Matrix& w = net.layer(i).weight;
    if (w.is_zero()) return "layer " + std::to_string(i) + " has an all-zero weight";
    if (std::holds_alternative<normalizers::WeightNorm>(kind)) {
      for (std::size_t r = 0; r < w.rows(); ++r) {
        if (linalg::norm2(w.row_span(r)) == 0.0)
          return "layer " + std::to_string(i) + " has a zero row";
      }
    }
  }
  return {};
}

double evaluate(const Network& net, const LossFn& loss, const BindOptions& options) {
  const BoundNetwork b = bind(net, options);
  const ad::Var v = loss(b);
  if (v.rows() != 1 || v.cols() != 1) throw ShapeError("gradcheck: loss must be 1x1");
  return v.item();
}

}  // namespace

GradCheckReport finite_difference_check(const Network& net, const LossFn& loss,
                                        const GradCheckOptions& options) {
  GradCheckReport report;
  report.tolerance = options.tolerance;
  if (std::string why = degenerate_layer(net); !why.empty()) {
    report.skipped = true;
    report.skip_reason = why;
    return report;
  }

  Network work = net;
  Rng rng(0x9c4ecULL);
  for (std::size_t i = 0; i < work.num_layers(); ++i) {
    auto& state = work.layer(i).spectral;
    if (state.u_tilde.empty() || options.warmup_power_steps <= 0) continue;
    state = linalg::spectral_norm(work.layer(i).weight, state, options.warmup_power_steps, rng).state;
  }

  BindOptions eval;
  eval.spectral = SpectralUpdate::scratch;
  eval.power_steps = options.eval_power_steps;
  eval.requires_grad = false;

  BindOptions analytic_opts = eval;
  analytic_opts.requires_grad = true;
  analytic_opts.detach_normalizer = options.inject_fault;
  const BoundNetwork bound = bind(work, analytic_opts);
  const ad::Var value = loss(bound);
  const std::vector<ad::Var> grads = ad::grad(value, bound.parameters());

  const std::vector<std::string> names = work.parameter_names();
  std::vector<Matrix*> params = work.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    TensorCheck check;
    check.name = names[p];
    const Matrix& analytic = grads[p].value();
    for (std::size_t k = 0; k < params[p]->size(); ++k) {
      double& x = params[p]->values()[k];
      const double keep = x;
      x = keep + options.step;
      const double up = evaluate(work, loss, eval);
      x = keep - options.step;
      const double down = evaluate(work, loss, eval);
      x = keep;
      const double a = analytic.values()[k];
      const double f = (up - down) / (2.0 * options.step);
      if (std::abs(a) <= options.grad_floor) {
        ++check.below_floor;
        continue;
      }
      ++check.compared;
      const double rel = std::abs(a - f) / std::max(std::abs(a), std::abs(f));
      check.max_rel_error = std::max(check.max_rel_error, rel);
    }
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.tensors.push_back(std::move(check));
  }
  return report;
}

}  // namespace snorm::net
