#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace cosm {

/// Itemized charge categories of the work-unit cost model.
enum class Charge : std::size_t {
  notify_delivery,
  rule_eval,
  layer_toggle,
  delegate_rebind,
  component_load,
  snapshot_entity,
  joinpoint_eval_base,
  joinpoint_history_eval,
  count_
};

inline constexpr std::size_t kChargeCount = static_cast<std::size_t>(Charge::count_);

enum class Phase { monitoring, detection, decision, adaptation };

std::string_view to_string(Charge c);
std::string_view to_string(Phase p);
Phase phase_of(Charge c);

/// Unit price of every charge. Defaults are the reference cost model.
struct CostModel {
  std::array<std::uint64_t, kChargeCount> units{1, 1, 2, 2, 25, 1, 1, 1};

  std::uint64_t price(Charge c) const { return units[static_cast<std::size_t>(c)]; }
  void set_price(Charge c, std::uint64_t u);

  /// Reads `key = value` lines (`#` comments); keys are the charge names,
  /// e.g. `component-load = 25`. Throws Error{parse_error}.
  static CostModel parse(std::string_view text);
  static CostModel load(const std::filesystem::path& path);
};

/// Accumulated itemized charges. Work units are quantity x price.
struct Ledger {
  std::array<std::uint64_t, kChargeCount> quantity{};

  void add(Charge c, std::uint64_t n = 1) { quantity[static_cast<std::size_t>(c)] += n; }
  std::uint64_t count(Charge c) const { return quantity[static_cast<std::size_t>(c)]; }
  std::uint64_t work_units(const CostModel& model) const;
  std::uint64_t work_units(const CostModel& model, Phase phase) const;

  Ledger& operator+=(const Ledger& other);
  friend Ledger operator-(Ledger a, const Ledger& b);
  friend bool operator==(const Ledger&, const Ledger&) = default;
};

}  // namespace cosm
