#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "snorm/linalg/matrix.hpp"

// Minimal reverse-mode differentiation over dense matrices.
//
// Every backward rule is itself written with the differentiable ops below, so
// gradients computed with `create_graph = true` can be differentiated again.
// That is what the gradient penalty needs: the penalty depends on d D / d x,
// and its gradient with respect to the parameters goes through that first
// backward pass.
//
// Ops whose local derivative is piecewise constant (relu masks, the safe
// square root used for norms) treat that factor as a constant. For relu and
// leaky relu this is exact; for `sqrt_safe` it means the graph is correct to
// first order only, which is all the norm computations need.

namespace snorm::ad {

using linalg::Matrix;

class Var;

namespace detail {

struct Node {
  Matrix value;
  bool requires_grad = false;
  std::vector<Var> inputs;
  // Maps the upstream gradient to one gradient per input (undefined Var = no contribution).
  std::function<std::vector<Var>(const Var&)> backward;
};

}  // namespace detail

class Var {
 public:
  Var() = default;

  bool defined() const noexcept { return node_ != nullptr; }
  const Matrix& value() const;
  bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  /// Scalar value of a 1x1 variable.
  double item() const;

  const detail::Node* node() const noexcept { return node_.get(); }

 private:
  friend Var make_var(Matrix, std::vector<Var>, std::function<std::vector<Var>(const Var&)>);
  friend Var constant(Matrix);
  friend Var parameter(Matrix);
  std::shared_ptr<detail::Node> node_;
};

Var constant(Matrix value);
Var constant(double value);
/// Leaf that gradients are taken with respect to.
Var parameter(Matrix value);

/// Records an op node if gradients are enabled and any input requires them.
Var make_var(Matrix value, std::vector<Var> inputs,
             std::function<std::vector<Var>(const Var&)> backward);

/// Disables graph recording on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

struct GradOptions {
  /// Record the backward pass so the returned gradients are differentiable.
  bool create_graph = false;
};

/// Gradients of `output` with respect to each of `wrt`, seeded with `seed`
/// (same shape as output). Inputs the output does not depend on get a zero
/// matrix of their shape.
std::vector<Var> grad(const Var& output, std::span<const Var> wrt, const Matrix& seed,
                      GradOptions options = {});
/// Scalar (1x1) output, seed 1.
std::vector<Var> grad(const Var& output, std::span<const Var> wrt, GradOptions options = {});

// --- ops -------------------------------------------------------------------

Var matmul(const Var& a, const Var& b);
Var matmul_tn(const Var& a, const Var& b);  // a^T b
Var matmul_nt(const Var& a, const Var& b);  // a b^T

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var neg(const Var& a);
Var hadamard(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var square(const Var& a);
Var reciprocal(const Var& a);

/// a * s where s is 1x1.
Var mul_scalar(const Var& a, const Var& s);
/// a / s where s is 1x1.
Var div_scalar(const Var& a, const Var& s);

Var sum(const Var& a);   // 1x1
Var mean(const Var& a);  // 1x1
Var sum_rows(const Var& a);  // 1 x cols: column totals
Var sum_cols(const Var& a);  // rows x 1: row totals
Var broadcast_rows(const Var& row, std::size_t rows);  // 1 x c -> rows x c
Var broadcast_cols(const Var& col, std::size_t cols);  // r x 1 -> r x cols
Var fill(const Var& scalar, std::size_t rows, std::size_t cols);

/// a + row broadcast over rows.
Var add_row(const Var& a, const Var& row);
/// Each row of a divided by the matching entry of the r x 1 column.
Var div_col(const Var& a, const Var& col);

Var relu(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
/// log(1 + e^x), evaluated without overflow.
Var softplus(const Var& a);
/// sqrt with derivative 0 at 0; first-order only.
Var sqrt_safe(const Var& a);

/// out.flat[k] = in.flat[index[k]], or 0 where index[k] < 0.
Var gather(const Var& a, std::shared_ptr<const std::vector<long>> index, std::size_t rows,
           std::size_t cols);
/// Adjoint of gather: out.flat[index[k]] += in.flat[k].
Var scatter_add(const Var& a, std::shared_ptr<const std::vector<long>> index, std::size_t rows,
                std::size_t cols);

/// Cuts the graph.
Var detach(const Var& a);

}  // namespace snorm::ad
