#include "cosm/harness/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "cosm/error.hpp"

namespace cosm::harness {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::cosm: return "cosm";
    case Mode::daop: return "daop";
    case Mode::both: return "both";
  }
  return "both";
}

std::optional<Mode> parse_mode(std::string_view text) {
  if (text == "cosm") return Mode::cosm;
  if (text == "daop") return Mode::daop;
  if (text == "both") return Mode::both;
  return std::nullopt;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
std::optional<T> parse_unsigned(std::string_view s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::set<std::string>* known) {
  Scenario sc;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) -> void {
    throw Error(ErrorCode::parse_error, "scenario line " + std::to_string(lineno) + ": " + what);
  };
  while (!text.empty()) {
    ++lineno;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto sp = line.find_first_of(" \t");
    const std::string_view head = line.substr(0, sp);
    const std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp));

    if (head.starts_with("@")) {
      if (head == "@repeat") {
        auto n = parse_unsigned<std::size_t>(rest);
        if (!n || *n == 0) fail("@repeat needs a positive count");
        sc.repeat = *n;
      } else if (head == "@seed") {
        auto s = parse_unsigned<std::uint64_t>(rest);
        if (!s) fail("@seed needs a non-negative integer");
        sc.seed = *s;
      } else if (head == "@mode") {
        auto m = parse_mode(rest);
        if (!m) fail("@mode must be cosm, daop or both");
        sc.mode = *m;
      } else {
        fail("unknown directive '" + std::string(head) + "'");
      }
      continue;
    }

    if (!head.starts_with("t=")) fail("expected t=<ms>");
    auto at = parse_unsigned<std::int64_t>(head.substr(2));
    if (!at || *at < 0) fail("bad time '" + std::string(head.substr(2)) + "'");
    const auto eq = rest.find('=');
    if (eq == std::string_view::npos) fail("expected <Entity>=<value>");
    const std::string entity(trim(rest.substr(0, eq)));
    const std::string_view literal = trim(rest.substr(eq + 1));
    if (!adl::is_valid_selector(entity)) fail("bad entity name '" + entity + "'");
    if (literal.empty()) fail("missing value for " + entity);
    if (known && !known->contains(entity))
      throw Error(ErrorCode::unknown_entity, "scenario line " + std::to_string(lineno) + ": undeclared entity '" +
                                                 entity + "'");
    sc.steps.push_back({*at, entity, parse_literal(literal)});
  }
  std::stable_sort(sc.steps.begin(), sc.steps.end(),
                   [](const ScenarioStep& a, const ScenarioStep& b) { return a.at < b.at; });
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path, const std::set<std::string>* known) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), known);
}

std::vector<Joinpoint> default_joinpoints(const ecampus::Thresholds& t) {
  using policy::BoolExpr;
  using policy::CompareOp;
  auto battery = [](CompareOp op, double v) { return BoolExpr::compare("BatteryLevel", op, v); };
  return {
      {"gps", "locationFix", battery(CompareOp::ge, t.high)},
      {"wifi", "locationFix", BoolExpr::all_of({battery(CompareOp::ge, t.low), battery(CompareOp::lt, t.high)})},
      {"cell", "locationFix", battery(CompareOp::lt, t.low)},
      {"reducedFeatures", "filterFeatures", battery(CompareOp::lt, t.low)},
      {"sleepSuspend", "suspendUpdates", BoolExpr::compare("SleepMode", CompareOp::eq, true)},
  };
}

Stats statistics(const std::vector<double>& samples) {
  Stats s;
  if (samples.empty()) return s;
  double sum = 0;
  for (double x : samples) sum += x;
  s.mean = sum / static_cast<double>(samples.size());
  double sq = 0;
  for (double x : samples) sq += (x - s.mean) * (x - s.mean);
  s.variance = sq / static_cast<double>(samples.size());
  s.stddev = std::sqrt(s.variance);
  return s;
}

std::vector<std::uint64_t> RunReport::work_unit_series() const {
  std::vector<std::uint64_t> out;
  for (const auto& e : series) out.push_back(e.work_units);
  return out;
}

namespace {

void finish(RunReport& r, const CostModel& cost) {
  r.totals = {};
  r.charges = {};
  for (auto& e : r.series) {
    for (std::size_t p = 0; p < 4; ++p) e.phase_units[p] = e.charges.work_units(cost, static_cast<Phase>(p));
    r.totals.deliveries += e.deliveries;
    r.totals.unhandled += e.unhandled;
    r.totals.plans += e.plans;
    r.totals.plan_steps += e.plan_steps;
    r.totals.work_units += e.work_units;
    r.charges += e.charges;
  }
  for (std::size_t p = 0; p < 4; ++p) r.phase_units[p] = r.charges.work_units(cost, static_cast<Phase>(p));
}

/// Architecture and policy state right before a step.
struct PreState {
  context::Snapshot contexts;
  std::set<adl::Activation> active;
  std::map<std::pair<std::string, std::string>, policy::Internals> internals;
};

RunReport run_cosm_impl(const Scenario& scenario, const ecampus::Fixture& fixture, const CostModel& cost,
                        std::vector<PreState>* capture) {
  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  r.engine = "cosm";
  adaptation::Middleware mw(fixture.doc, fixture.factories, fixture.entities, cost);
  std::size_t logged_failures = 0;
  for (std::size_t k = 0; k < scenario.steps.size(); ++k) {
    const auto& step = scenario.steps[k];
    if (capture) capture->push_back({context::snapshot(mw.contexts()), mw.graph().active_layers(), mw.all_internals()});
    const Ledger before = mw.ledger();
    EventCost ec;
    ec.event = k + 1;
    try {
      auto rep = mw.step(step.entity, step.value, step.at);
      ec.deliveries = rep.dispatch.deliveries;
      ec.unhandled = rep.dispatch.unhandled;
      ec.plans = rep.records.size();
      for (const auto& rec : rep.records) ec.plan_steps += rec.steps;
    } catch (const Error& e) {
      r.errors.push_back("event " + std::to_string(k + 1) + ": " + e.what());
    }
    for (; logged_failures < mw.failures().size(); ++logged_failures) {
      const auto& f = mw.failures()[logged_failures];
      std::string msg = "event " + std::to_string(k + 1) + ": plan " + std::to_string(f.plan_id) + " rejected";
      for (const auto& d : f.diagnostics) msg += "; " + d;
      r.errors.push_back(std::move(msg));
    }
    ec.charges = mw.ledger() - before;
    ec.work_units = ec.charges.work_units(cost);
    r.series.push_back(std::move(ec));
  }
  finish(r, cost);
  r.wall_time = std::chrono::steady_clock::now() - start;
  return r;
}

}  // namespace

RunReport run_cosm(const Scenario& scenario, const ecampus::Fixture& fixture, const CostModel& cost) {
  return run_cosm_impl(scenario, fixture, cost, nullptr);
}

RunReport run_daop(const Scenario& scenario, const adaptation::EntitySeed& entities,
                   const std::vector<Joinpoint>& joinpoints, const CostModel& cost) {
  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  r.engine = "daop";
  context::Snapshot state;
  for (const auto& [name, v] : entities) state.insert_or_assign(name, v);
  std::vector<context::Snapshot> history;
  std::set<std::string> reported;
  const policy::VariableLookup lookup = [&](std::string_view name) -> std::optional<Value> {
    auto it = state.find(name);
    if (it == state.end()) return std::nullopt;
    return it->second;
  };
  for (std::size_t k = 0; k < scenario.steps.size(); ++k) {
    const auto& step = scenario.steps[k];
    EventCost ec;
    ec.event = k + 1;
    if (!state.contains(step.entity))
      r.errors.push_back("event " + std::to_string(k + 1) + ": unknown entity '" + step.entity + "'");
    state.insert_or_assign(step.entity, step.value);
    ec.charges.add(Charge::snapshot_entity, state.size());
    history.push_back(state);
    for (const auto& jp : joinpoints) {
      ec.charges.add(Charge::joinpoint_eval_base);
      ec.charges.add(Charge::joinpoint_history_eval, history.size());
      ++ec.joinpoint_evaluations;
      try {
        if (policy::evaluate(jp.pointcut, lookup)) ++ec.advices;
      } catch (const Error& e) {
        if (reported.insert(jp.id).second) r.errors.push_back("joinpoint " + jp.id + ": " + e.what());
      }
    }
    ec.work_units = ec.charges.work_units(cost);
    r.series.push_back(std::move(ec));
  }
  finish(r, cost);
  r.wall_time = std::chrono::steady_clock::now() - start;
  return r;
}

namespace {

bool replay_matches(const Scenario& scenario, const ecampus::Fixture& fixture, const CostModel& cost,
                    const std::vector<PreState>& pre, const RunReport& run) {
  for (std::size_t k = 0; k < scenario.steps.size(); ++k) {
    adaptation::Middleware mw(fixture.doc, fixture.factories, fixture.entities, cost);
    for (const auto& [name, v] : pre[k].contexts) mw.contexts().seed(name, v);
    for (auto& [id, c] : mw.graph().nodes)
      for (auto& l : c.layers) l.active = pre[k].active.contains({id, l.id});
    mw.restore_internals(pre[k].internals);
    const auto& step = scenario.steps[k];
    try {
      mw.step(step.entity, step.value, step.at);
    } catch (const Error&) {
    }
    if (mw.work_units() != run.series[k].work_units) return false;
  }
  return true;
}

}  // namespace

ComparisonReport compare(const Scenario& scenario, const ecampus::Fixture& fixture,
                         const std::vector<Joinpoint>& joinpoints, const CostModel& cost) {
  ComparisonReport out;
  std::vector<PreState> pre;
  out.cosm = run_cosm_impl(scenario, fixture, cost, &pre);
  out.daop = run_daop(scenario, fixture.entities, joinpoints, cost);
  out.daop_exceeds_cosm = out.daop.totals.work_units > out.cosm.totals.work_units;
  const auto d = out.daop.work_unit_series();
  out.daop_nondecreasing = std::is_sorted(d.begin(), d.end());
  out.daop_strictly_increasing = std::adjacent_find(d.begin(), d.end(), [](auto a, auto b) { return b <= a; }) == d.end();
  out.cosm_history_independent = replay_matches(scenario, fixture, cost, pre, out.cosm);
  return out;
}

std::vector<RunReport> run_repeats(const Scenario& scenario, Mode mode, std::size_t n, std::uint64_t seed,
                                   const ecampus::Fixture& fixture, const std::vector<Joinpoint>& joinpoints,
                                   const CostModel& cost) {
  if (n == 0) throw Error(ErrorCode::parse_error, "repeat count must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> jitter(0, 4);
  std::vector<Mode> engines;
  if (mode != Mode::daop) engines.push_back(Mode::cosm);
  if (mode != Mode::cosm) engines.push_back(Mode::daop);

  std::vector<RunReport> first(engines.size());
  std::vector<std::vector<double>> units(engines.size()), walls(engines.size());
  for (std::size_t i = 0; i < n; ++i) {
    Scenario jittered = scenario;
    std::int64_t floor = 0;
    for (auto& s : jittered.steps) {
      s.at = std::max(floor, s.at + jitter(rng));
      floor = s.at;
    }
    for (std::size_t e = 0; e < engines.size(); ++e) {
      RunReport r = engines[e] == Mode::cosm ? run_cosm(jittered, fixture, cost)
                                             : run_daop(jittered, fixture.entities, joinpoints, cost);
      units[e].push_back(static_cast<double>(r.totals.work_units));
      walls[e].push_back(std::chrono::duration<double, std::milli>(r.wall_time).count());
      if (i == 0) {
        first[e] = std::move(r);
      } else if (r.work_unit_series() != first[e].work_unit_series()) {
        first[e].errors.push_back("run " + std::to_string(i + 1) + ": work-unit series differs from run 1");
      }
    }
  }
  for (std::size_t e = 0; e < engines.size(); ++e)
    first[e].repeats = RepeatStatistics{n, statistics(units[e]), statistics(walls[e])};
  return first;
}

namespace {

std::string num(double v) { return to_literal(v); }

}  // namespace

std::string render_csv(const std::vector<RunReport>& reports) {
  std::ostringstream out;
  out << "event-seq,phase,metric,value\n";
  auto row = [&](const std::string& seq, std::string_view phase, const std::string& metric, double v) {
    out << seq << ',' << phase << ',' << metric << ',' << num(v) << '\n';
  };
  constexpr Phase phases[] = {Phase::monitoring, Phase::detection, Phase::decision, Phase::adaptation};
  for (const auto& r : reports) {
    const std::string& e = r.engine;
    for (const auto& ev : r.series) {
      const std::string seq = std::to_string(ev.event);
      for (std::size_t p = 0; p < 4; ++p)
        row(seq, to_string(phases[p]), e + ".work-units", static_cast<double>(ev.phase_units[p]));
      row(seq, "all", e + ".work-units", static_cast<double>(ev.work_units));
      row(seq, "all", e + ".deliveries", static_cast<double>(ev.deliveries));
      row(seq, "all", e + ".unhandled", static_cast<double>(ev.unhandled));
      row(seq, "all", e + ".plans", static_cast<double>(ev.plans));
      row(seq, "all", e + ".plan-steps", static_cast<double>(ev.plan_steps));
      row(seq, "all", e + ".joinpoint-evaluations", static_cast<double>(ev.joinpoint_evaluations));
    }
    for (std::size_t p = 0; p < 4; ++p)
      row("total", to_string(phases[p]), e + ".work-units", static_cast<double>(r.phase_units[p]));
    row("total", "all", e + ".work-units", static_cast<double>(r.totals.work_units));
    row("total", "all", e + ".deliveries", static_cast<double>(r.totals.deliveries));
    row("total", "all", e + ".unhandled", static_cast<double>(r.totals.unhandled));
    row("total", "all", e + ".plans", static_cast<double>(r.totals.plans));
    row("total", "all", e + ".plan-steps", static_cast<double>(r.totals.plan_steps));
    for (std::size_t c = 0; c < kChargeCount; ++c) {
      const auto charge = static_cast<Charge>(c);
      row("total", to_string(phase_of(charge)), e + ".charge." + std::string(to_string(charge)),
          static_cast<double>(r.charges.count(charge)));
    }
    if (r.repeats) {
      row("repeat", "all", e + ".runs", static_cast<double>(r.repeats->runs));
      row("repeat", "all", e + ".work-units.mean", r.repeats->work_units.mean);
      row("repeat", "all", e + ".work-units.variance", r.repeats->work_units.variance);
      row("repeat", "all", e + ".work-units.stddev", r.repeats->work_units.stddev);
    }
  }
  return out.str();
}

std::string render_table(const std::vector<RunReport>& reports) {
  std::ostringstream out;
  for (const auto& r : reports) {
    out << "== " << r.engine << " ==\n";
    out << std::setw(6) << "event" << std::setw(12) << "work-units" << std::setw(12) << "deliveries"
        << std::setw(8) << "plans" << std::setw(8) << "steps" << std::setw(12) << "joinpoints" << '\n';
    for (const auto& ev : r.series)
      out << std::setw(6) << ev.event << std::setw(12) << ev.work_units << std::setw(12) << ev.deliveries
          << std::setw(8) << ev.plans << std::setw(8) << ev.plan_steps << std::setw(12) << ev.joinpoint_evaluations
          << '\n';
    out << "total work-units " << r.totals.work_units << " (monitoring " << r.phase_units[0] << ", detection "
        << r.phase_units[1] << ", decision " << r.phase_units[2] << ", adaptation " << r.phase_units[3] << ")\n";
    out << "deliveries " << r.totals.deliveries << ", unhandled " << r.totals.unhandled << ", plans "
        << r.totals.plans << ", plan steps " << r.totals.plan_steps << '\n';
    out << "wall time " << std::fixed << std::setprecision(3)
        << std::chrono::duration<double, std::milli>(r.wall_time).count() << " ms\n";
    out.unsetf(std::ios::fixed);
    if (r.repeats) {
      out << "repeats " << r.repeats->runs << ": work-units mean " << num(r.repeats->work_units.mean) << " variance "
          << num(r.repeats->work_units.variance) << " stddev " << num(r.repeats->work_units.stddev)
          << "; wall ms mean " << num(r.repeats->wall_time_ms.mean) << " stddev "
          << num(r.repeats->wall_time_ms.stddev) << '\n';
    }
    for (const auto& e : r.errors) out << "error: " << e << '\n';
  }
  return out.str();
}

}  // namespace cosm::harness
