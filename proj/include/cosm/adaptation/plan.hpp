#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cosm/adaptation/action.hpp"
#include "cosm/adl/graph.hpp"
#include "cosm/cost.hpp"
#include "cosm/kernel/component.hpp"

namespace cosm::adaptation {

struct CompositionPlan {
  std::uint64_t id = 0;
  std::vector<AdaptationAction> actions;
  std::vector<std::uint64_t> cause;
  bool verified = false;
  std::vector<std::string> unknown_styles;
};

/// Architecture state: active layers, component roster, delegate bindings.
struct StateDigest {
  std::set<adl::Activation> active_layers;
  std::set<std::string> roster;
  std::map<std::string, std::string> delegates;

  /// Stable textual fingerprint, e.g. for reports.
  std::string fingerprint() const;
  friend bool operator==(const StateDigest&, const StateDigest&) = default;
};

StateDigest digest_of(const adl::ComponentGraph& graph);

struct AdaptationRecord {
  std::uint64_t plan_id = 0;
  std::vector<AdaptationAction> actions;
  std::vector<std::uint64_t> cause;
  StateDigest before;
  StateDigest after;
  std::size_t steps = 0;
  Ledger charges;
  std::uint64_t work_units = 0;
  std::chrono::nanoseconds wall_time{0};
};

struct PlanFailure {
  std::uint64_t plan_id = 0;
  std::vector<std::uint64_t> cause;
  std::vector<std::string> diagnostics;
};

/// Concatenates action lists in order, expands `exclusive:<group>` styles
/// (activating a group layer first deactivates its siblings), resolves
/// toggle conflicts last-writer-wins and drops actions that would not change
/// the graph. Layers of components loaded within the plan start inactive.
/// Throws Error{unresolvable_target} for toggles naming unknown
/// components or layers.
CompositionPlan build_composition_plan(const adl::ComponentGraph& graph,
                                       const std::vector<std::vector<AdaptationAction>>& results,
                                       const std::vector<std::string>& styles,
                                       const kernel::FactoryRegistry* factories = nullptr);

/// Charge each action incurs under the cost model.
Ledger charges_for(const AdaptationAction& action);

}  // namespace cosm::adaptation
