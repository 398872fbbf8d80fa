#pragma once

#include <span>
#include <string>
#include <vector>

#include "snorm/net/network.hpp"
#include "snorm/net/serialize.hpp"

namespace snorm::metrics {

struct LayerSpectrum {
  std::size_t layer = 0;
  double top = 0.0;            // largest singular value before scaling
  std::vector<double> scaled;  // descending, largest = 1 (all zero for a zero weight)
  double effective_rank = 0.0;
};

struct SpectrumReport {
  std::vector<LayerSpectrum> layers;
};

/// exp(H(p)) with p_t = s_t^2 / sum s^2. Throws DomainError if all values are zero.
double effective_rank(std::span<const double> singular_values);

/// Oracle singular values of every effective weight. Spectral layers use a
/// scratch copy of their state with `power_steps` iterations (0 = configured).
SpectrumReport spectrum_report(const net::Network& net, int power_steps = 0);

io::Json to_json(const SpectrumReport& report);
/// Columns: layer,index,singular_value_scaled
std::string spectrum_csv(const SpectrumReport& report);

}  // namespace snorm::metrics
