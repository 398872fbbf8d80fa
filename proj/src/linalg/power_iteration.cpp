#include "snorm/linalg/power_iteration.hpp"

#include <string>

#include "snorm/error.hpp"

namespace snorm::linalg {

SpectralState make_spectral_state(std::size_t rows, std::size_t cols, Rng& rng) {
  SpectralState s;
  s.u_tilde = random_unit_vector(rows, rng);
  s.v_tilde.assign(cols, 0.0);
  return s;
}

PowerStepResult power_iteration_step(const Matrix& w, SpectralState state, Rng& rng) {
  if (state.u_tilde.size() != w.rows()) {
    throw ShapeError("power_iteration_step: u_tilde has length " +
                     std::to_string(state.u_tilde.size()) + ", W has " +
                     std::to_string(w.rows()) + " rows");
  }
  std::vector<double> v = matvec_t(w, state.u_tilde);
  double nv = norm2(v);
  if (nv == 0.0) {
    state.u_tilde = random_unit_vector(w.rows(), rng);
    v = matvec_t(w, state.u_tilde);
    nv = norm2(v);
    if (nv == 0.0) throw ZeroMatrixError("power_iteration_step: W^T u = 0 after restart");
  }
  for (double& x : v) x /= nv;

  std::vector<double> u = matvec(w, v);
  const double nu = norm2(u);
  if (nu == 0.0) throw ZeroMatrixError("power_iteration_step: W v = 0");
  for (double& x : u) x /= nu;

  // u = Wv/|Wv| makes u^T W v = |Wv|; evaluate the product explicitly anyway so
  // the returned value is exactly the bilinear form the normalizer differentiates.
  const double sigma = dot(u, matvec(w, v));
  state.u_tilde = std::move(u);
  state.v_tilde = std::move(v);
  state.last_sigma = sigma;
  return {std::move(state), sigma};
}

PowerStepResult spectral_norm(const Matrix& w, SpectralState state, int n_power, Rng& rng) {
  if (n_power < 1) throw DomainError("spectral_norm: n_power must be >= 1");
  PowerStepResult r{std::move(state), 0.0};
  for (int i = 0; i < n_power; ++i) r = power_iteration_step(w, std::move(r.state), rng);
  return r;
}

}  // namespace snorm::linalg
