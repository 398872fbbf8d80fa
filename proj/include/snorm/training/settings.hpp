#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "snorm/training/adam.hpp"

namespace snorm::training {

/// A named optimizer setting: Adam hyperparameters plus n_dis, the number of
/// discriminator updates per generator update.
struct OptSetting {
  std::string name;
  AdamConfig adam;
  int n_dis = 1;

  friend bool operator==(const OptSetting&, const OptSetting&) = default;
};

/// Settings "A" through "F". Throws DomainError for any other name.
OptSetting named_setting(std::string_view name);
std::vector<OptSetting> all_settings();

void validate(const OptSetting& setting);

}  // namespace snorm::training
