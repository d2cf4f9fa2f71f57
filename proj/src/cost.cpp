#include "cosm/cost.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "cosm/error.hpp"

namespace cosm {

std::string_view to_string(Charge c) {
  switch (c) {
    case Charge::notify_delivery: return "notify-delivery";
    case Charge::rule_eval: return "policy-rule-eval";
    case Charge::layer_toggle: return "layer-toggle";
    case Charge::delegate_rebind: return "delegate-rebind";
    case Charge::component_load: return "component-load";
    case Charge::snapshot_entity: return "snapshot-per-entity";
    case Charge::joinpoint_eval_base: return "joinpoint-eval-base";
    case Charge::joinpoint_history_eval: return "joinpoint-history-eval";
    case Charge::count_: break;
  }
  return "?";
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::monitoring: return "monitoring";
    case Phase::detection: return "detection";
    case Phase::decision: return "decision";
    case Phase::adaptation: return "adaptation";
  }
  return "?";
}

Phase phase_of(Charge c) {
  switch (c) {
    case Charge::snapshot_entity: return Phase::monitoring;
    case Charge::notify_delivery:
    case Charge::joinpoint_eval_base: return Phase::detection;
    case Charge::rule_eval:
    case Charge::joinpoint_history_eval: return Phase::decision;
    default: return Phase::adaptation;
  }
}

void CostModel::set_price(Charge c, std::uint64_t u) {
  if (u == 0) throw Error(ErrorCode::parse_error, "charge '" + std::string(to_string(c)) + "' must be positive");
  units[static_cast<std::size_t>(c)] = u;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

CostModel CostModel::parse(std::string_view text) {
  CostModel model;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::parse_error, "cost model line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto val = trim(line.substr(eq + 1));
    std::uint64_t units = 0;
    auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), units);
    if (ec != std::errc{} || ptr != val.data() + val.size())
      throw Error(ErrorCode::parse_error, "cost model line " + std::to_string(line_no) + ": bad value");
    bool found = false;
    for (std::size_t i = 0; i < kChargeCount; ++i) {
      if (to_string(static_cast<Charge>(i)) == key) {
        model.set_price(static_cast<Charge>(i), units);
        found = true;
      }
    }
    if (!found) throw Error(ErrorCode::parse_error, "cost model: unknown charge '" + std::string(key) + "'");
  }
  return model;
}

CostModel CostModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open cost model " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::uint64_t Ledger::work_units(const CostModel& model) const {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < kChargeCount; ++i) total += quantity[i] * model.units[i];
  return total;
}

std::uint64_t Ledger::work_units(const CostModel& model, Phase phase) const {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < kChargeCount; ++i)
    if (phase_of(static_cast<Charge>(i)) == phase) total += quantity[i] * model.units[i];
  return total;
}

Ledger& Ledger::operator+=(const Ledger& other) {
  for (std::size_t i = 0; i < kChargeCount; ++i) quantity[i] += other.quantity[i];
  return *this;
}

Ledger operator-(Ledger a, const Ledger& b) {
  for (std::size_t i = 0; i < kChargeCount; ++i) a.quantity[i] -= b.quantity[i];
  return a;
}

}  // namespace cosm
