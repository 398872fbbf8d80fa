#include "snorm/metrics/spectrum.hpp"

#include <cmath>
#include <cstdio>

#include "snorm/error.hpp"
#include "snorm/linalg/decompositions.hpp"

namespace snorm::metrics {

double effective_rank(std::span<const double> s) {
  double total = 0.0;
  for (double x : s) total += x * x;
  if (!(total > 0.0)) throw DomainError("effective_rank: all singular values are zero");
  double entropy = 0.0;
  for (double x : s) {
    const double p = x * x / total;
    if (p > 0.0) entropy -= p * std::log(p);
  }
  return std::exp(entropy);
}

SpectrumReport spectrum_report(const net::Network& net, int power_steps) {
  SpectrumReport report;
  const auto weights = net::effective_weights(net, power_steps);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    LayerSpectrum layer;
    layer.layer = i;
    const auto s = linalg::singular_values(weights[i]);
    layer.top = s.front();
    layer.scaled = s;
    if (layer.top > 0.0) {
      for (double& x : layer.scaled) x /= layer.top;
      layer.effective_rank = effective_rank(s);
    }
    report.layers.push_back(std::move(layer));
  }
  return report;
}

io::Json to_json(const SpectrumReport& report) {
  io::Json layers = io::Json::array();
  for (const LayerSpectrum& l : report.layers) {
    layers.push_back({{"layer", l.layer},
                      {"top", l.top},
                      {"effective_rank", l.effective_rank},
                      {"singular_values_scaled", l.scaled}});
  }
  return io::Json{{"layers", std::move(layers)}};
}

std::string spectrum_csv(const SpectrumReport& report) {
  std::string out = "layer,index,singular_value_scaled\n";
  char buf[64];
  for (const LayerSpectrum& l : report.layers) {
    for (std::size_t k = 0; k < l.scaled.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", l.scaled[k]);
      out += std::to_string(l.layer) + "," + std::to_string(k) + "," + buf + "\n";
    }
  }
  return out;
}

}  // namespace snorm::metrics
