#pragma once

#include <vector>

#include "snorm/linalg/matrix.hpp"

namespace snorm::linalg {

/// Recycled singular-vector estimates for one weight matrix.
///
/// `u_tilde` is carried from one update to the next so that a single power
/// step per update tracks the slowly drifting top singular pair. `v_tilde` is
/// the right estimate produced alongside it by the last step; the spectral
/// normalizer differentiates sigma through u_tilde v_tilde^T.
struct SpectralState {
  std::vector<double> u_tilde;  // length rows(W), unit norm
  std::vector<double> v_tilde;  // length cols(W), unit norm once a step has run
  double last_sigma = 0.0;

  friend bool operator==(const SpectralState&, const SpectralState&) = default;
};

/// Fresh state with u_tilde uniform on the unit sphere.
SpectralState make_spectral_state(std::size_t rows, std::size_t cols, Rng& rng);

struct PowerStepResult {
  SpectralState state;
  double sigma = 0.0;
};

/// One alternating step: v <- W^T u / |W^T u|, u <- W v / |W v|, sigma = u^T W v.
///
/// If W^T u vanishes, u is redrawn from `rng` once; a second zero throws
/// ZeroMatrixError. Repeated calls on a fixed W give non-decreasing sigma.
PowerStepResult power_iteration_step(const Matrix& w, SpectralState state, Rng& rng);

/// Runs `n_power` steps and returns the last estimate.
PowerStepResult spectral_norm(const Matrix& w, SpectralState state, int n_power, Rng& rng);

}  // namespace snorm::linalg
