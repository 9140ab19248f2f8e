#pragma once

#include "peri/app/config.hpp"

#include <string>
#include <vector>

namespace peri::app {

struct Scenario {
  std::string name;
  std::string description;
  json patch;  // merged over the defaults
  bool listed = true;
};

const std::vector<Scenario>& scenarios();

/// nullptr when unknown.
const Scenario* find_scenario(const std::string& name);

}  // namespace peri::app
