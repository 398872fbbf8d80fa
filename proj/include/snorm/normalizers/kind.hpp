#pragma once

#include <string>
#include <variant>

namespace snorm::normalizers {

struct NoNormalizer {
  friend bool operator==(const NoNormalizer&, const NoNormalizer&) = default;
};

/// W / sigma(W), sigma from recycled power iteration.
struct Spectral {
  int n_power = 1;
  friend bool operator==(const Spectral&, const Spectral&) = default;
};

/// gamma * W / sigma(W) with a learned scalar gamma.
struct SpectralReparam {
  double gamma_init = 1.0;
  int n_power = 1;
  friend bool operator==(const SpectralReparam&, const SpectralReparam&) = default;
};

/// Each row scaled to unit l2 norm (no learned multiplier).
struct WeightNorm {
  friend bool operator==(const WeightNorm&, const WeightNorm&) = default;
};

struct Frobenius {
  friend bool operator==(const Frobenius&, const Frobenius&) = default;
};

/// Entry-wise truncation to [-c, c] after every optimizer step.
struct Clip {
  double c = 0.01;
  friend bool operator==(const Clip&, const Clip&) = default;
};

/// Loss penalty beta * ||W^T W - I||_F^2 with orthonormal initialization.
struct Orthonormal {
  double beta = 1e-4;
  friend bool operator==(const Orthonormal&, const Orthonormal&) = default;
};

using NormalizerKind =
    std::variant<NoNormalizer, Spectral, SpectralReparam, WeightNorm, Frobenius, Clip, Orthonormal>;

/// Throws DomainError on an out-of-range field.
void validate(const NormalizerKind& kind);

/// Short stable token: none, spectral, spectral_reparam, weight_norm, frobenius, clip, orthonormal.
std::string kind_name(const NormalizerKind& kind);

/// Human-readable label including parameters, e.g. "clip(0.01)".
std::string describe(const NormalizerKind& kind);

/// True for kinds that divide by a norm of W and are undefined at W = 0.
bool divides_by_norm(const NormalizerKind& kind);

}  // namespace snorm::normalizers
