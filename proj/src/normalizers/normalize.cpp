#include "snorm/normalizers/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "snorm/error.hpp"
#include "snorm/overloaded.hpp"

namespace snorm::normalizers {

SpectralResult apply_spectral(const Matrix& w, linalg::SpectralState state, int n_power,
                              Rng& rng) {
  if (w.is_zero()) throw ZeroMatrixError("apply_spectral: zero matrix");
  auto r = linalg::spectral_norm(w, std::move(state), n_power, rng);
  return {w * (1.0 / r.sigma), std::move(r.state), r.sigma};
}

SpectralResult apply_reparam(const Matrix& w, double gamma, linalg::SpectralState state,
                             int n_power, Rng& rng) {
  if (!(gamma > 0.0)) throw DomainError("apply_reparam: gamma must be > 0");
  SpectralResult r = apply_spectral(w, std::move(state), n_power, rng);
  r.weight *= gamma;
  return r;
}

Matrix apply_weight_norm(const Matrix& w) {
  Matrix out = w;
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const double n = linalg::norm2(w.row_span(i));
    if (n == 0.0) throw ZeroMatrixError("apply_weight_norm: row " + std::to_string(i) + " is zero");
    for (double& x : out.row_span(i)) x /= n;
  }
  return out;
}

Matrix apply_frobenius(const Matrix& w) {
  const double n = linalg::frobenius_norm(w);
  if (n == 0.0) throw ZeroMatrixError("apply_frobenius: zero matrix");
  return w * (1.0 / n);
}

Matrix apply_clip(const Matrix& w, double c) {
  if (!(c > 0.0)) throw DomainError("apply_clip: c must be > 0");
  Matrix out = w;
  for (double& x : out.values()) x = std::clamp(x, -c, c);
  return out;
}

PenaltyTerm orthonormal_penalty(const Matrix& w, double beta) {
  if (!(beta >= 0.0)) throw DomainError("orthonormal_penalty: beta must be >= 0");
  Matrix gram = linalg::matmul_tn(w, w);
  for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) -= 1.0;
  const double fro = linalg::frobenius_norm(gram);
  Matrix grad = linalg::matmul(w, gram) * (4.0 * beta);
  return {beta * fro * fro, {std::move(grad)}};
}

Matrix reshape_conv_kernel(std::span<const double> kernel, KernelShape shape) {
  if (shape.size() == 0) throw DomainError("reshape_conv_kernel: empty kernel shape");
  if (kernel.size() != shape.size()) throw ShapeError("reshape_conv_kernel: size mismatch");
  // Row-major d_out x d_in x h x w already lists each output channel contiguously.
  return Matrix(shape.d_out, shape.d_in * shape.h * shape.w,
                std::vector<double>(kernel.begin(), kernel.end()));
}

std::vector<double> unreshape_conv_kernel(const Matrix& matrix, KernelShape shape) {
  if (matrix.rows() != shape.d_out || matrix.cols() != shape.d_in * shape.h * shape.w) {
    throw ShapeError("unreshape_conv_kernel: matrix does not match kernel shape");
  }
  return {matrix.values().begin(), matrix.values().end()};
}

NormGradient general_norm_gradient(const Matrix& w, const Matrix& w_bar, const Matrix& upstream,
                                   const NormalizerKind& kind,
                                   const linalg::SpectralState* state) {
  if (w.rows() != w_bar.rows() || w.cols() != w_bar.cols() || w.rows() != upstream.rows() ||
      w.cols() != upstream.cols()) {
    throw ShapeError("general_norm_gradient: w, w_bar and upstream must share a shape");
  }
  NormGradient out;
  Matrix norm_grad;
  if (std::holds_alternative<Frobenius>(kind)) {
    out.norm = linalg::frobenius_norm(w);
    norm_grad = w_bar;
  } else if (std::holds_alternative<Spectral>(kind)) {
    if (state == nullptr || state->u_tilde.size() != w.rows() ||
        state->v_tilde.size() != w.cols()) {
      throw DomainError("general_norm_gradient: spectral kind needs a populated state");
    }
    norm_grad = linalg::outer(state->u_tilde, state->v_tilde);
    out.norm = linalg::dot(state->u_tilde, linalg::matvec(w, state->v_tilde));
  } else {
    throw DomainError("general_norm_gradient: unsupported kind " + kind_name(kind));
  }
  if (out.norm == 0.0) throw ZeroMatrixError("general_norm_gradient: zero norm");
  out.lambda = linalg::dot(upstream.values(), w_bar.values());
  out.gradient = (upstream - norm_grad * out.lambda) * (1.0 / out.norm);
  return out;
}

ad::Var normalize(const ad::Var& w, const NormalizerKind& kind, const linalg::SpectralState& state,
                  const ad::Var& gamma, bool detach_scale) {
  auto maybe_detach = [detach_scale](ad::Var v) { return detach_scale ? ad::detach(v) : v; };
  auto spectral_sigma = [&]() {
    if (state.u_tilde.size() != w.rows() || state.v_tilde.size() != w.cols()) {
      throw DomainError("normalize: spectral state not initialized for this weight");
    }
    // sigma = u^T W v with u, v held fixed, so d sigma / dW = u v^T.
    ad::Var uv = ad::constant(linalg::outer(state.u_tilde, state.v_tilde));
    ad::Var sigma = ad::sum(ad::hadamard(w, uv));
    if (sigma.item() == 0.0) throw ZeroMatrixError("normalize: sigma estimate is zero");
    return maybe_detach(sigma);
  };

  return std::visit(
      overloaded{
          [&](const Spectral&) { return ad::div_scalar(w, spectral_sigma()); },
          [&](const SpectralReparam&) {
            if (!gamma.defined()) throw DomainError("normalize: spectral_reparam needs gamma");
            return ad::mul_scalar(ad::div_scalar(w, spectral_sigma()), gamma);
          },
          [&](const WeightNorm&) {
            ad::Var norms = ad::sqrt_safe(ad::sum_cols(ad::square(w)));
            for (double n : norms.value().values()) {
              if (n == 0.0) throw ZeroMatrixError("normalize: weight_norm row is zero");
            }
            return ad::div_col(w, maybe_detach(norms));
          },
          [&](const Frobenius&) {
            ad::Var n = ad::sqrt_safe(ad::sum(ad::square(w)));
            if (n.item() == 0.0) throw ZeroMatrixError("normalize: frobenius of zero matrix");
            return ad::div_scalar(w, maybe_detach(n));
          },
          [&](const auto&) { return w; },
      },
      kind);
}

ad::Var orthonormal_penalty(const ad::Var& w, double beta) {
  if (!(beta >= 0.0)) throw DomainError("orthonormal_penalty: beta must be >= 0");
  const ad::Var gram = ad::matmul_tn(w, w);
  const ad::Var diff = ad::sub(gram, ad::constant(Matrix::identity(w.cols())));
  return ad::scale(ad::sum(ad::square(diff)), beta);
}

}  // namespace snorm::normalizers
