#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cosm/adaptation/middleware.hpp"
#include "cosm/cost.hpp"
#include "cosm/ecampus/ecampus.hpp"
#include "cosm/policy/expr.hpp"

namespace cosm::harness {

enum class Mode { cosm, daop, both };

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view text);

struct ScenarioStep {
  std::int64_t at = 0;
  std::string entity;
  Value value;
  friend bool operator==(const ScenarioStep&, const ScenarioStep&) = default;
};

struct Scenario {
  std::vector<ScenarioStep> steps;
  std::optional<std::size_t> repeat;
  std::optional<std::uint64_t> seed;
  std::optional<Mode> mode;
};

/// Lines `t=<ms> <Entity>=<literal>`, `#` comments and the directives
/// `@repeat n`, `@seed s`, `@mode cosm|daop|both`. Steps are stably sorted by
/// time. Throws Error{parse_error}, or Error{unknown_entity} for entities
/// outside `known` when given.
Scenario parse_scenario(std::string_view text, const std::set<std::string>* known = nullptr);
Scenario load_scenario(const std::filesystem::path& path, const std::set<std::string>* known = nullptr);

/// A DAOP program point with its context predicate over entity names.
struct Joinpoint {
  std::string id;
  std::string selector;
  policy::BoolExpr pointcut;
};

/// The aspect set of the DAOP eCampus variant: the three nested location
/// aspects, reduced features and sleep suspension.
std::vector<Joinpoint> default_joinpoints(const ecampus::Thresholds& t = {});

struct EventCost {
  std::size_t event = 0;
  Ledger charges;
  std::uint64_t work_units = 0;
  std::array<std::uint64_t, 4> phase_units{};
  std::size_t deliveries = 0;
  std::size_t unhandled = 0;
  std::size_t plans = 0;
  std::size_t plan_steps = 0;
  std::size_t joinpoint_evaluations = 0;
  std::size_t advices = 0;
};

struct RunTotals {
  std::size_t deliveries = 0;
  std::size_t unhandled = 0;
  std::size_t plans = 0;
  std::size_t plan_steps = 0;
  std::uint64_t work_units = 0;
};

struct Stats {
  double mean = 0;
  double variance = 0;
  double stddev = 0;
};

/// Population statistics; a single sample has zero variance.
Stats statistics(const std::vector<double>& samples);

struct RepeatStatistics {
  std::size_t runs = 0;
  Stats work_units;
  Stats wall_time_ms;
};

struct RunReport {
  std::string engine;
  std::vector<EventCost> series;
  RunTotals totals;
  Ledger charges;
  std::array<std::uint64_t, 4> phase_units{};
  std::chrono::nanoseconds wall_time{0};
  std::vector<std::string> errors;
  std::optional<RepeatStatistics> repeats;

  std::vector<std::uint64_t> work_unit_series() const;
};

/// Full pipeline per step: sense, dispatch, adapt, verify, execute.
/// Per-step errors are recorded and the run continues.
RunReport run_cosm(const Scenario& scenario, const ecampus::Fixture& fixture, const CostModel& cost);

/// Abstract DAOP engine. Per event k: snapshot every entity, append it to
/// the history, then evaluate every joinpoint at base + k x history cost and
/// run the advice of those whose pointcut holds.
RunReport run_daop(const Scenario& scenario, const adaptation::EntitySeed& entities,
                   const std::vector<Joinpoint>& joinpoints, const CostModel& cost);

struct ComparisonReport {
  RunReport cosm;
  RunReport daop;
  bool daop_exceeds_cosm = false;
  bool daop_nondecreasing = false;
  bool daop_strictly_increasing = false;
  bool cosm_history_independent = false;
};

/// Runs both engines. COSM history independence is checked by replaying
/// every step alone from its recorded pre-state and comparing costs.
ComparisonReport compare(const Scenario& scenario, const ecampus::Fixture& fixture,
                         const std::vector<Joinpoint>& joinpoints, const CostModel& cost);

/// n runs per engine of `mode` with event times jittered from `seed`.
/// Work units depend only on event content; wall times are reported apart.
std::vector<RunReport> run_repeats(const Scenario& scenario, Mode mode, std::size_t n, std::uint64_t seed,
                                   const ecampus::Fixture& fixture, const std::vector<Joinpoint>& joinpoints,
                                   const CostModel& cost);

/// CSV with columns event-seq,phase,metric,value. Deterministic: no wall
/// times.
std::string render_csv(const std::vector<RunReport>& reports);

/// Human-readable table, including wall times.
std::string render_table(const std::vector<RunReport>& reports);

}  // namespace cosm::harness
