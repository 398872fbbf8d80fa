#include "snorm/training/settings.hpp"

#include "snorm/error.hpp"

namespace snorm::training {

OptSetting named_setting(std::string_view name) {
  //          alpha   beta1 beta2  n_dis
  if (name == "A") return {"A", {1e-4, 0.5, 0.9}, 5};
  if (name == "B") return {"B", {1e-4, 0.5, 0.999}, 1};
  if (name == "C") return {"C", {2e-4, 0.5, 0.999}, 1};
  if (name == "D") return {"D", {1e-3, 0.5, 0.9}, 5};
  if (name == "E") return {"E", {1e-3, 0.5, 0.999}, 5};
  if (name == "F") return {"F", {1e-3, 0.9, 0.999}, 5};
  throw DomainError("unknown optimizer setting '" + std::string(name) + "' (expected A-F)");
}

std::vector<OptSetting> all_settings() {
  std::vector<OptSetting> out;
  for (const char* n : {"A", "B", "C", "D", "E", "F"}) out.push_back(named_setting(n));
  return out;
}

void validate(const OptSetting& setting) {
  validate(setting.adam);
  if (setting.n_dis < 1) throw DomainError("n_dis must be >= 1");
}

}  // namespace snorm::training
