#pragma once

#include <span>
#include <vector>

#include "snorm/linalg/matrix.hpp"
#include "snorm/linalg/power_iteration.hpp"
#include "snorm/net/autodiff.hpp"
#include "snorm/normalizers/kind.hpp"

namespace snorm::normalizers {

using linalg::Matrix;

struct SpectralResult {
  Matrix weight;
  linalg::SpectralState state;
  double sigma = 0.0;  // the estimate the weight was divided by (before any gamma)
};

/// W / sigma_hat(W) after `n_power` recycled power steps. Zero W throws ZeroMatrixError.
SpectralResult apply_spectral(const Matrix& w, linalg::SpectralState state, int n_power, Rng& rng);

/// gamma * W / sigma_hat(W). gamma must be positive.
SpectralResult apply_reparam(const Matrix& w, double gamma, linalg::SpectralState state,
                             int n_power, Rng& rng);

/// Rows scaled to unit l2 norm. A zero row throws ZeroMatrixError.
Matrix apply_weight_norm(const Matrix& w);

/// W / ||W||_F. Zero W throws ZeroMatrixError.
Matrix apply_frobenius(const Matrix& w);

/// Entries truncated to [-c, c]; c must be positive.
Matrix apply_clip(const Matrix& w, double c);

/// A scalar penalty and its gradients. For a single-matrix penalty `gradients`
/// holds one entry; for network penalties it follows Network::parameters().
struct PenaltyTerm {
  double value = 0.0;
  std::vector<Matrix> gradients;
};

/// beta * ||W^T W - I||_F^2 with gradient 4 beta W (W^T W - I).
PenaltyTerm orthonormal_penalty(const Matrix& w, double beta);

struct KernelShape {
  std::size_t d_out = 1, d_in = 1, h = 1, w = 1;
  std::size_t size() const { return d_out * d_in * h * w; }
};

/// d_out x d_in x h x w (row-major) -> d_out x (d_in h w). Row r is output channel r.
Matrix reshape_conv_kernel(std::span<const double> kernel, KernelShape shape);
/// Inverse of reshape_conv_kernel.
std::vector<double> unreshape_conv_kernel(const Matrix& matrix, KernelShape shape);

/// Raw-weight gradient of a loss through W_bar = W / N(W).
///
/// grad = (1/N) (G - lambda * dN/dW) with lambda = trace(G^T W_bar), where G
/// is the gradient with respect to W_bar. dN/dW is W_bar for Frobenius and
/// u v^T (the state's power-iteration vectors) for spectral.
struct NormGradient {
  Matrix gradient;
  double norm = 0.0;
  double lambda = 0.0;
};

/// Supported kinds: Spectral and Frobenius. Spectral needs `state` with both
/// vectors populated. Anything else throws DomainError.
NormGradient general_norm_gradient(const Matrix& w, const Matrix& w_bar, const Matrix& upstream,
                                   const NormalizerKind& kind,
                                   const linalg::SpectralState* state = nullptr);

// --- graph versions used by the network ------------------------------------

/// Effective weight for `kind` as a differentiable function of `w` (and of
/// `gamma` for SpectralReparam). `state` must already hold the power-iteration
/// vectors for spectral kinds. With `detach_scale` the normalizing divisor is
/// treated as a constant.
ad::Var normalize(const ad::Var& w, const NormalizerKind& kind, const linalg::SpectralState& state,
                  const ad::Var& gamma, bool detach_scale = false);

/// beta * ||W^T W - I||_F^2 as a 1x1 graph node.
ad::Var orthonormal_penalty(const ad::Var& w, double beta);

}  // namespace snorm::normalizers
