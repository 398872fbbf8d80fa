#include "snorm/normalizers/kind.hpp"

#include <sstream>

#include "snorm/error.hpp"
#include "snorm/overloaded.hpp"

namespace snorm::normalizers {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

void validate(const NormalizerKind& kind) {
  std::visit(overloaded{
                 [](const Spectral& s) {
                   if (s.n_power < 1) throw DomainError("spectral: n_power must be >= 1");
                 },
                 [](const SpectralReparam& s) {
                   if (s.n_power < 1) throw DomainError("spectral_reparam: n_power must be >= 1");
                   if (!(s.gamma_init > 0.0))
                     throw DomainError("spectral_reparam: gamma must be > 0");
                 },
                 [](const Clip& c) {
                   if (!(c.c > 0.0)) throw DomainError("clip: c must be > 0");
                 },
                 [](const Orthonormal& o) {
                   if (!(o.beta >= 0.0)) throw DomainError("orthonormal: beta must be >= 0");
                 },
                 [](const auto&) {},
             },
             kind);
}

std::string kind_name(const NormalizerKind& kind) {
  return std::visit(overloaded{
                        [](const NoNormalizer&) { return std::string("none"); },
                        [](const Spectral&) { return std::string("spectral"); },
                        [](const SpectralReparam&) { return std::string("spectral_reparam"); },
                        [](const WeightNorm&) { return std::string("weight_norm"); },
                        [](const Frobenius&) { return std::string("frobenius"); },
                        [](const Clip&) { return std::string("clip"); },
                        [](const Orthonormal&) { return std::string("orthonormal"); },
                    },
                    kind);
}

std::string describe(const NormalizerKind& kind) {
  return std::visit(
      overloaded{
          [](const Spectral& s) { return "spectral(" + std::to_string(s.n_power) + ")"; },
          [](const SpectralReparam& s) {
            return "spectral_reparam(" + fmt(s.gamma_init) + "," + std::to_string(s.n_power) + ")";
          },
          [](const Clip& c) { return "clip(" + fmt(c.c) + ")"; },
          [](const Orthonormal& o) { return "orthonormal(" + fmt(o.beta) + ")"; },
          [&kind](const auto&) { return kind_name(kind); },
      },
      kind);
}

bool divides_by_norm(const NormalizerKind& kind) {
  return std::holds_alternative<Spectral>(kind) || std::holds_alternative<SpectralReparam>(kind) ||
         std::holds_alternative<WeightNorm>(kind) || std::holds_alternative<Frobenius>(kind);
}

}  // namespace snorm::normalizers
