#pragma once

#include <string>
#include <variant>
#include <vector>

#include "cosm/value.hpp"

namespace cosm::adaptation {

struct ActivateLayer {
  std::string component;
  std::string layer;
  friend bool operator==(const ActivateLayer&, const ActivateLayer&) = default;
};

struct DeactivateLayer {
  std::string component;
  std::string layer;
  friend bool operator==(const DeactivateLayer&, const DeactivateLayer&) = default;
};

struct LoadComponent {
  std::string id;
  friend bool operator==(const LoadComponent&, const LoadComponent&) = default;
};

struct ReplaceComponent {
  std::string old_id;
  std::string new_id;
  friend bool operator==(const ReplaceComponent&, const ReplaceComponent&) = default;
};

struct RebindDelegate {
  std::string component;
  std::string target;
  friend bool operator==(const RebindDelegate&, const RebindDelegate&) = default;
};

struct InvokeSelector {
  std::string component;
  std::string selector;
  std::vector<Value> args;
  friend bool operator==(const InvokeSelector&, const InvokeSelector&) = default;
};

using AdaptationAction = std::variant<ActivateLayer, DeactivateLayer, LoadComponent,
                                      ReplaceComponent, RebindDelegate, InvokeSelector>;

std::string describe(const AdaptationAction& action);

}  // namespace cosm::adaptation
