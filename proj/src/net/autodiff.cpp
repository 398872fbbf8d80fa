#include "snorm/net/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "snorm/error.hpp"

namespace snorm::ad {

namespace {

thread_local bool g_grad_enabled = true;

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

void require_scalar(const Var& s, const char* op) {
  if (s.rows() != 1 || s.cols() != 1) throw ShapeError(std::string(op) + ": expected 1x1");
}

template <typename F>
Matrix map(const Matrix& a, F f) {
  Matrix out = a;
  for (double& x : out.values()) x = f(x);
  return out;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

const Matrix& Var::value() const {
  if (!node_) throw Error("ad::Var: undefined variable");
  return node_->value;
}

double Var::item() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ShapeError("ad::Var::item: not a 1x1 value");
  return v.values()[0];
}

Var constant(Matrix value) {
  Var v;
  v.node_ = std::make_shared<detail::Node>();
  v.node_->value = std::move(value);
  return v;
}

Var constant(double value) { return constant(Matrix(1, 1, value)); }

Var parameter(Matrix value) {
  Var v = constant(std::move(value));
  v.node_->requires_grad = true;
  return v;
}

Var make_var(Matrix value, std::vector<Var> inputs,
             std::function<std::vector<Var>(const Var&)> backward) {
  Var v;
  v.node_ = std::make_shared<detail::Node>();
  v.node_->value = std::move(value);
  const bool needs = g_grad_enabled && std::any_of(inputs.begin(), inputs.end(),
                                                   [](const Var& x) { return x.requires_grad(); });
  if (needs) {
    v.node_->requires_grad = true;
    v.node_->inputs = std::move(inputs);
    v.node_->backward = std::move(backward);
  }
  return v;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

std::vector<Var> grad(const Var& output, std::span<const Var> wrt, const Matrix& seed,
                      GradOptions options) {
  if (seed.rows() != output.rows() || seed.cols() != output.cols()) {
    throw ShapeError("ad::grad: seed shape differs from output");
  }
  using detail::Node;

  // Reverse topological order via iterative post-order DFS.
  std::vector<const Node*> order;
  if (output.requires_grad()) {
    std::unordered_set<const Node*> visited;
    std::vector<std::pair<const Node*, std::size_t>> stack{{output.node(), 0}};
    visited.insert(output.node());
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->inputs.size()) {
        const Node* child = node->inputs[next++].node();
        if (child && child->requires_grad && visited.insert(child).second) {
          stack.emplace_back(child, 0);
        }
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
  }

  std::optional<NoGradGuard> no_grad;
  if (!options.create_graph) no_grad.emplace();

  std::unordered_map<const Node*, Var> grads;
  grads.emplace(output.node(), constant(seed));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Node* node = *it;
    if (!node->backward) continue;
    auto found = grads.find(node);
    if (found == grads.end()) continue;
    const Var upstream = found->second;
    std::vector<Var> in_grads = node->backward(upstream);
    for (std::size_t i = 0; i < node->inputs.size() && i < in_grads.size(); ++i) {
      const Var& input = node->inputs[i];
      if (!input.requires_grad() || !in_grads[i].defined()) continue;
      auto [slot, inserted] = grads.try_emplace(input.node(), in_grads[i]);
      if (!inserted) slot->second = add(slot->second, in_grads[i]);
    }
  }

  std::vector<Var> out;
  out.reserve(wrt.size());
  for (const Var& w : wrt) {
    auto found = grads.find(w.node());
    if (found != grads.end() && w.requires_grad()) {
      out.push_back(options.create_graph ? found->second : constant(found->second.value()));
    } else {
      out.push_back(constant(Matrix(w.rows(), w.cols())));
    }
  }
  return out;
}

std::vector<Var> grad(const Var& output, std::span<const Var> wrt, GradOptions options) {
  require_scalar(output, "ad::grad");
  return grad(output, wrt, Matrix(1, 1, 1.0), options);
}

Var matmul(const Var& a, const Var& b) {
  return make_var(linalg::matmul(a.value(), b.value()), {a, b}, [a, b](const Var& g) {
    return std::vector<Var>{matmul_nt(g, b), matmul_tn(a, g)};
  });
}

Var matmul_tn(const Var& a, const Var& b) {
  return make_var(linalg::matmul_tn(a.value(), b.value()), {a, b}, [a, b](const Var& g) {
    return std::vector<Var>{matmul_nt(b, g), matmul(a, g)};
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  return make_var(linalg::matmul_nt(a.value(), b.value()), {a, b}, [a, b](const Var& g) {
    return std::vector<Var>{matmul(g, b), matmul_tn(g, a)};
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "ad::add");
  return make_var(a.value() + b.value(), {a, b},
                  [](const Var& g) { return std::vector<Var>{g, g}; });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "ad::sub");
  return make_var(a.value() - b.value(), {a, b},
                  [](const Var& g) { return std::vector<Var>{g, neg(g)}; });
}

Var neg(const Var& a) {
  return make_var(a.value() * -1.0, {a}, [](const Var& g) { return std::vector<Var>{neg(g)}; });
}

Var hadamard(const Var& a, const Var& b) {
  require_same_shape(a, b, "ad::hadamard");
  return make_var(linalg::hadamard(a.value(), b.value()), {a, b}, [a, b](const Var& g) {
    return std::vector<Var>{hadamard(g, b), hadamard(g, a)};
  });
}

Var scale(const Var& a, double s) {
  return make_var(a.value() * s, {a}, [s](const Var& g) { return std::vector<Var>{scale(g, s)}; });
}

Var add_scalar(const Var& a, double s) {
  return make_var(map(a.value(), [s](double x) { return x + s; }), {a},
                  [](const Var& g) { return std::vector<Var>{g}; });
}

Var square(const Var& a) { return hadamard(a, a); }

Var reciprocal(const Var& a) {
  return make_var(map(a.value(), [](double x) { return 1.0 / x; }), {a}, [a](const Var& g) {
    return std::vector<Var>{neg(hadamard(g, square(reciprocal(a))))};
  });
}

Var mul_scalar(const Var& a, const Var& s) {
  require_scalar(s, "ad::mul_scalar");
  return make_var(a.value() * s.item(), {a, s}, [a, s](const Var& g) {
    return std::vector<Var>{mul_scalar(g, s), sum(hadamard(g, a))};
  });
}

Var div_scalar(const Var& a, const Var& s) { return mul_scalar(a, reciprocal(s)); }

Var sum(const Var& a) {
  double total = 0.0;
  for (double x : a.value().values()) total += x;
  const std::size_t r = a.rows(), c = a.cols();
  return make_var(Matrix(1, 1, total), {a},
                  [r, c](const Var& g) { return std::vector<Var>{fill(g, r, c)}; });
}

Var mean(const Var& a) {
  if (a.value().empty()) throw ShapeError("ad::mean: empty input");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var sum_rows(const Var& a) {
  const Matrix& v = a.value();
  Matrix out(1, v.cols());
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) out(0, j) += v(i, j);
  const std::size_t r = v.rows();
  return make_var(std::move(out), {a},
                  [r](const Var& g) { return std::vector<Var>{broadcast_rows(g, r)}; });
}

Var sum_cols(const Var& a) {
  const Matrix& v = a.value();
  Matrix out(v.rows(), 1);
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) out(i, 0) += v(i, j);
  const std::size_t c = v.cols();
  return make_var(std::move(out), {a},
                  [c](const Var& g) { return std::vector<Var>{broadcast_cols(g, c)}; });
}

Var broadcast_rows(const Var& row, std::size_t rows) {
  if (row.rows() != 1) throw ShapeError("ad::broadcast_rows: expected a 1 x c row");
  const Matrix& v = row.value();
  Matrix out(rows, v.cols());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) out(i, j) = v(0, j);
  return make_var(std::move(out), {row},
                  [](const Var& g) { return std::vector<Var>{sum_rows(g)}; });
}

Var broadcast_cols(const Var& col, std::size_t cols) {
  if (col.cols() != 1) throw ShapeError("ad::broadcast_cols: expected an r x 1 column");
  const Matrix& v = col.value();
  Matrix out(v.rows(), cols);
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = v(i, 0);
  return make_var(std::move(out), {col},
                  [](const Var& g) { return std::vector<Var>{sum_cols(g)}; });
}

Var fill(const Var& scalar, std::size_t rows, std::size_t cols) {
  require_scalar(scalar, "ad::fill");
  return make_var(Matrix(rows, cols, scalar.item()), {scalar},
                  [](const Var& g) { return std::vector<Var>{sum(g)}; });
}

Var add_row(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw ShapeError("ad::add_row: shape mismatch");
  return add(a, broadcast_rows(row, a.rows()));
}

Var div_col(const Var& a, const Var& col) {
  if (col.cols() != 1 || col.rows() != a.rows()) throw ShapeError("ad::div_col: shape mismatch");
  return hadamard(a, broadcast_cols(reciprocal(col), a.cols()));
}

Var relu(const Var& a) { return leaky_relu(a, 0.0); }

Var leaky_relu(const Var& a, double slope) {
  Matrix out = a.value();
  Matrix mask(out.rows(), out.cols(), 1.0);
  auto ov = out.values();
  auto mv = mask.values();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    if (ov[i] < 0.0) {
      ov[i] *= slope;
      mv[i] = slope;
    }
  }
  return make_var(std::move(out), {a}, [mask = std::move(mask)](const Var& g) {
    return std::vector<Var>{hadamard(g, constant(mask))};
  });
}

Var tanh(const Var& a) {
  return make_var(map(a.value(), [](double x) { return std::tanh(x); }), {a}, [a](const Var& g) {
    return std::vector<Var>{hadamard(g, add_scalar(neg(square(tanh(a))), 1.0))};
  });
}

Var sigmoid(const Var& a) {
  return make_var(map(a.value(), stable_sigmoid), {a}, [a](const Var& g) {
    const Var s = sigmoid(a);
    return std::vector<Var>{hadamard(g, hadamard(s, add_scalar(neg(s), 1.0)))};
  });
}

Var softplus(const Var& a) {
  return make_var(
      map(a.value(),
          [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }),
      {a}, [a](const Var& g) { return std::vector<Var>{hadamard(g, sigmoid(a))}; });
}

Var sqrt_safe(const Var& a) {
  Matrix out = map(a.value(), [](double x) { return std::sqrt(std::max(x, 0.0)); });
  Matrix factor = map(out, [](double r) { return r > 0.0 ? 0.5 / r : 0.0; });
  return make_var(std::move(out), {a}, [factor = std::move(factor)](const Var& g) {
    return std::vector<Var>{hadamard(g, constant(factor))};
  });
}

Var gather(const Var& a, std::shared_ptr<const std::vector<long>> index, std::size_t rows,
           std::size_t cols) {
  if (index->size() != rows * cols) throw ShapeError("ad::gather: index size mismatch");
  const auto in = a.value().values();
  Matrix out(rows, cols);
  auto ov = out.values();
  for (std::size_t k = 0; k < ov.size(); ++k) {
    const long src = (*index)[k];
    if (src >= 0) ov[k] = in[static_cast<std::size_t>(src)];
  }
  const std::size_t in_rows = a.rows(), in_cols = a.cols();
  return make_var(std::move(out), {a}, [index, in_rows, in_cols](const Var& g) {
    return std::vector<Var>{scatter_add(g, index, in_rows, in_cols)};
  });
}

Var scatter_add(const Var& a, std::shared_ptr<const std::vector<long>> index, std::size_t rows,
                std::size_t cols) {
  if (index->size() != a.value().size()) throw ShapeError("ad::scatter_add: index size mismatch");
  const auto in = a.value().values();
  Matrix out(rows, cols);
  auto ov = out.values();
  for (std::size_t k = 0; k < in.size(); ++k) {
    const long dst = (*index)[k];
    if (dst >= 0) ov[static_cast<std::size_t>(dst)] += in[k];
  }
  const std::size_t in_rows = a.rows(), in_cols = a.cols();
  return make_var(std::move(out), {a}, [index, in_rows, in_cols](const Var& g) {
    return std::vector<Var>{gather(g, index, in_rows, in_cols)};
  });
}

Var detach(const Var& a) { return constant(a.value()); }

}  // namespace snorm::ad
