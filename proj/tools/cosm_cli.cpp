#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "cosm/adl/document.hpp"
#include "cosm/ecampus/ecampus.hpp"
#include "cosm/error.hpp"
#include "cosm/harness/harness.hpp"

using namespace cosm;

namespace {

ecampus::Thresholds parse_thresholds(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw Error(ErrorCode::parse_error, "--thresholds expects hi,lo");
  const Value hi = parse_literal(text.substr(0, comma));
  const Value lo = parse_literal(text.substr(comma + 1));
  if (!std::holds_alternative<double>(hi) || !std::holds_alternative<double>(lo))
    throw Error(ErrorCode::parse_error, "--thresholds expects two numbers");
  return {std::get<double>(hi), std::get<double>(lo)};
}

ecampus::Fixture load_fixture(const std::string& adl_path, const std::string& thresholds) {
  adl::Document doc = adl_path.empty() ? adl::parse_adl(ecampus::fixture_adl()) : adl::load_adl(adl_path);
  if (!thresholds.empty()) ecampus::apply_thresholds(doc, parse_thresholds(thresholds));
  return ecampus::fixture_from(std::move(doc));
}

std::set<std::string> entity_names(const ecampus::Fixture& f) {
  std::set<std::string> out;
  for (const auto& [name, _] : f.entities) out.insert(name);
  return out;
}

void print_features(const std::string& path, const ecampus::Fixture& fixture, const harness::Scenario& sc) {
  Value battery = 100.0;
  for (const auto& [name, v] : fixture.entities)
    if (name == "BatteryLevel") battery = v;
  for (const auto& s : sc.steps)
    if (s.entity == "BatteryLevel") battery = s.value;
  if (!std::holds_alternative<double>(battery)) return;
  const auto band = ecampus::band_for(std::get<double>(battery), ecampus::thresholds_of(fixture.doc));
  const auto kept = ecampus::filter_features(ecampus::load_feature_catalog(path), band);
  std::cout << "features at battery " << to_literal(battery) << ":";
  for (const auto& f : kept) std::cout << ' ' << f.id << '(' << to_literal(f.score) << ')';
  std::cout << '\n';
}

int run(const std::string& adl_path, const std::string& scenario_path, const std::string& mode_text,
        std::optional<std::size_t> repeat, std::optional<std::uint64_t> seed, const std::string& cost_path,
        const std::string& out_path, const std::string& thresholds, const std::string& features) {
  const auto fixture = load_fixture(adl_path, thresholds);
  const auto known = entity_names(fixture);
  const auto scenario = harness::load_scenario(scenario_path, &known);
  const CostModel cost = cost_path.empty() ? CostModel{} : CostModel::load(cost_path);

  harness::Mode mode = scenario.mode.value_or(harness::Mode::both);
  if (!mode_text.empty()) mode = *harness::parse_mode(mode_text);
  const std::size_t n = repeat.value_or(scenario.repeat.value_or(1));
  const std::uint64_t s = seed.value_or(scenario.seed.value_or(0));
  const auto joinpoints = harness::default_joinpoints(ecampus::thresholds_of(fixture.doc));

  std::vector<harness::RunReport> reports;
  std::string trend;
  if (n > 1) {
    reports = harness::run_repeats(scenario, mode, n, s, fixture, joinpoints, cost);
  } else if (mode == harness::Mode::both) {
    auto cmp = harness::compare(scenario, fixture, joinpoints, cost);
    std::ostringstream t;
    t << "daop > cosm: " << (cmp.daop_exceeds_cosm ? "yes" : "no")
      << "; daop nondecreasing: " << (cmp.daop_nondecreasing ? "yes" : "no")
      << "; daop strictly increasing: " << (cmp.daop_strictly_increasing ? "yes" : "no")
      << "; cosm history-independent: " << (cmp.cosm_history_independent ? "yes" : "no") << '\n';
    trend = t.str();
    reports = {std::move(cmp.cosm), std::move(cmp.daop)};
  } else if (mode == harness::Mode::cosm) {
    reports = {harness::run_cosm(scenario, fixture, cost)};
  } else {
    reports = {harness::run_daop(scenario, fixture.entities, joinpoints, cost)};
  }

  std::cout << harness::render_table(reports) << trend;
  if (!features.empty()) print_features(features, fixture, scenario);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw Error(ErrorCode::parse_error, "cannot write " + out_path);
    out << harness::render_csv(reports);
  }
  return 0;
}

int repl(const std::string& adl_path, const std::string& thresholds) {
  const auto fixture = load_fixture(adl_path, thresholds);
  adaptation::Middleware mw(fixture.doc, fixture.factories, fixture.entities);
  std::int64_t clock = 0;
  std::string line;
  while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
    std::istringstream in(line);
    std::string cmd;
    if (!(in >> cmd)) continue;
    if (cmd == "quit" || cmd == "exit") break;
    try {
      if (cmd == "sense") {
        std::string entity, literal;
        if (!(in >> entity >> literal)) {
          std::cout << "usage: sense <Entity> <value>\n";
          continue;
        }
        auto rep = mw.step(entity, parse_literal(literal), clock++);
        std::cout << rep.dispatch.events << " events, " << rep.dispatch.deliveries << " deliveries, "
                  << rep.records.size() << " plans, " << rep.charges.work_units(mw.cost_model()) << " work-units\n";
        for (const auto& r : rep.records) {
          std::cout << "  plan " << r.plan_id << ":";
          for (const auto& a : r.actions) std::cout << " [" << adaptation::describe(a) << ']';
          std::cout << '\n';
        }
      } else if (cmd == "report") {
        std::cout << "state: " << adaptation::digest_of(mw.graph()).fingerprint() << '\n';
        for (const auto& [name, v] : context::snapshot(mw.contexts())) std::cout << "  " << name << " = " << to_literal(v) << '\n';
        std::cout << "work-units " << mw.work_units() << ", plans " << mw.log().size() << ", rejected "
                  << mw.failures().size() << '\n';
      } else {
        std::cout << "commands: sense <Entity> <value> | report | quit\n";
      }
    } catch (const Error& e) {
      std::cout << "error: " << e.what() << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-oriented self-adaptive middleware simulator"};
  app.require_subcommand(1);

  std::string adl_path, scenario_path, mode, cost_path, out_path, thresholds, features;
  std::optional<std::size_t> repeat;
  std::optional<std::uint64_t> seed;

  auto* run_cmd = app.add_subcommand("run", "Replay a scenario and report work units");
  run_cmd->add_option("--adl", adl_path, "COCA-ADL architecture file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--mode", mode, "cosm, daop or both")->check(CLI::IsMember({"cosm", "daop", "both"}));
  run_cmd->add_option("--repeat", repeat, "Number of repeated runs")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", seed, "Seed for timing jitter");
  run_cmd->add_option("--cost-model", cost_path, "Cost model file")->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_path, "CSV report path");
  run_cmd->add_option("--thresholds", thresholds, "Battery thresholds hi,lo");
  run_cmd->add_option("--features", features, "Feature catalog to filter at the final battery level")
      ->check(CLI::ExistingFile);

  auto* repl_cmd = app.add_subcommand("repl", "Interactive sense/report loop");
  repl_cmd->add_option("--adl", adl_path, "COCA-ADL architecture file (default: built-in fixture)")
      ->check(CLI::ExistingFile);
  repl_cmd->add_option("--thresholds", thresholds, "Battery thresholds hi,lo");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run_cmd->parsed())
      return run(adl_path, scenario_path, mode, repeat, seed, cost_path, out_path, thresholds, features);
    return repl(adl_path, thresholds);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
