#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "cosm/adaptation/middleware.hpp"
#include "cosm/adl/document.hpp"
#include "cosm/ecampus/ecampus.hpp"
#include "cosm/error.hpp"
#include "cosm/harness/harness.hpp"
#include "cosm/verification/verification.hpp"
#include "gen.hpp"
#include "policy_oracle.hpp"

using namespace cosm;
using namespace cosm::adaptation;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && pass_) {
      pass_ = false;
      first_ = what;
    }
    if (!ok) ++failures_;
  }
  Verdict verdict(const std::string& summary) const {
    if (pass_) return {true, summary};
    return {false, std::to_string(failures_) + " violation(s), first: " + first_};
  }

 private:
  bool pass_ = true;
  std::size_t failures_ = 0;
  std::string first_;
};

std::string data(const std::string& name) { return std::string(COSM_DATA_DIR) + "/" + name; }

struct Runtime {
  ecampus::Fixture fx = ecampus::build_fixture();
  Middleware mw{fx.doc, fx.factories, fx.entities};
};

Verdict adl_round_trip() {
  Check c;
  gen::Rng rng(1001);
  for (int i = 0; i < 500; ++i) {
    const auto doc = gen::document(rng);
    try {
      const auto text = adl::serialize_adl(doc);
      c.require(adl::parse_adl(text) == doc, "document " + std::to_string(i) + " changed");
      c.require(adl::serialize_adl(adl::parse_adl(text)) == text, "document " + std::to_string(i) + " text changed");
    } catch (const Error& e) {
      c.require(false, "document " + std::to_string(i) + ": " + e.what());
    }
  }
  return c.verdict("500 generated documents, 0 failures");
}

Verdict observer_filtering() {
  Check c;
  gen::Rng rng(2002);
  const std::vector<std::string> entities{"E0", "E1", "E2", "E3", "E4"};
  const std::vector<std::string> components{"C0", "C1", "C2", "C3", "C4", "C5"};
  std::size_t total = 0;
  for (int round = 0; round < 200; ++round) {
    std::vector<std::pair<std::string, std::string>> received;
    adl::ComponentGraph g;
    for (const auto& id : components) {
      kernel::CocaComponent comp;
      comp.id = id;
      comp.kind = adl::ComponentKind::context_oriented;
      for (const auto& e : entities)
        for (const char* phase : {"WillChange", "DidChange"}) {
          const std::string sel = e + phase;
          comp.static_handlers.emplace(sel, kernel::Handler{[&received, id, sel](kernel::LocalState&, const kernel::Message&) -> Value {
                                         received.emplace_back(id, sel);
                                         return true;
                                       }});
        }
      g.nodes.emplace(id, std::move(comp));
    }
    kernel::Application app(std::move(g));
    context::ContextRepository repo;
    context::EventQueue q;
    std::map<std::string, Value> model;
    for (const auto& e : entities) {
      repo.add_entity(e, 0.0);
      model[e] = 0.0;
    }
    std::set<std::pair<std::string, std::string>> regs;
    for (const auto& comp : components)
      for (const auto& e : entities)
        if (gen::coin(rng, 0.35)) {
          context::register_observer(repo, comp, e);
          regs.insert({comp, e});
        }
    std::vector<std::pair<std::string, std::string>> expected;
    std::size_t events = 0;
    while (events + 2 <= 50 && gen::coin(rng, 0.95)) {
      const auto& e = gen::pick(rng, entities);
      const Value v = static_cast<double>(gen::below(rng, 4));
      context::sense(repo, q, e, v, static_cast<std::int64_t>(events));
      if (model[e] == v) continue;
      model[e] = v;
      events += 2;
      for (const char* phase : {"WillChange", "DidChange"})
        for (const auto& comp : components)
          if (regs.contains({comp, e})) expected.emplace_back(comp, e + phase);
    }
    const auto rep = context::dispatch(repo, q, app);
    c.require(rep.events == events, "round " + std::to_string(round) + ": event count");
    c.require(received == expected, "round " + std::to_string(round) + ": deliveries differ from the cross-product");
    for (std::size_t i = 1; i < rep.processed.size(); ++i)
      c.require(rep.processed[i - 1].seq < rep.processed[i].seq, "round " + std::to_string(round) + ": FIFO order");
    total += expected.size();
  }
  return c.verdict("200 rounds, " + std::to_string(total) + " deliveries, 0 violations");
}

Verdict policy_oracle() {
  Check c;
  gen::Rng rng(3003);
  std::size_t points = 0;
  for (int round = 0; round < 200; ++round) {
    const auto vars = oracle::small_vars(rng);
    policy::DecisionPolicy p;
    p.id = "g" + std::to_string(round);
    for (const auto& v : vars) p.externals.push_back({v.name, "E" + v.name});
    for (std::size_t i = 0, n = 1 + gen::below(rng, 3); i < n; ++i)
      p.rules.push_back({std::nullopt, oracle::typed_condition(rng, vars), {LoadComponent{"X"}}, {}});
    oracle::Env env;
    oracle::for_each_point(vars, 0, env, [&] {
      policy::Snapshot ctx;
      for (const auto& [name, v] : env) ctx["E" + name] = v;
      const auto r = policy::evaluate_policy(p, ctx, {}, std::nullopt);
      for (std::size_t i = 0; i < p.rules.size(); ++i) {
        const bool expect = oracle::Interpreter(policy::render_expr(p.rules[i].condition), env).run();
        c.require(r.fired.at(i).index == i && (r.fired[i].branch == policy::Branch::action) == expect,
                  p.id + " rule " + std::to_string(i));
        ++points;
      }
    });
  }
  return c.verdict("200 policies, " + std::to_string(points) + " points, 100% agreement");
}

Verdict battery_ladder() {
  Check c;
  Runtime rt;
  const auto scenario = harness::load_scenario(data("ladder.scn"));
  std::vector<std::string> order;
  auto location = [&] { return ecampus::active_location_source(*rt.mw.graph().node("LocationManager")); };
  auto active_count = [&] {
    std::size_t n = 0;
    for (const auto& l : rt.mw.graph().node("LocationManager")->layers) n += l.active;
    return n;
  };
  c.require(active_count() == 1, "initial location layers");
  order.emplace_back(ecampus::to_string(*location()));
  for (const auto& s : scenario.steps) {
    rt.mw.step(s.entity, s.value, s.at);
    c.require(active_count() == 1, "location layers after battery " + to_literal(s.value));
    if (auto src = location(); src && order.back() != ecampus::to_string(*src)) order.emplace_back(ecampus::to_string(*src));
  }
  c.require(order == std::vector<std::string>{"gps", "wifi", "cell"}, "ladder order");
  c.require(rt.mw.graph().node("FeatureFilter")->layer("reduced")->active, "reduced filter at low battery");

  const auto features = ecampus::load_feature_catalog(data("features.tsv"));
  std::vector<ecampus::Feature> expect;
  for (const auto& f : features)
    if (f.score >= 0.7 && f.score <= 1.0) expect.push_back(f);
  c.require(ecampus::filter_features(features, ecampus::BatteryBand::low) == expect, "low-battery features");
  c.require(ecampus::filter_features({{"a", "a", 0, 0, 0.5}, {"b", "b", 0, 0, 0.8}, {"c", "c", 0, 0, 1.0}},
                                     ecampus::BatteryBand::low)
                    .size() == 2,
            "{0.5, 0.8, 1.0} keeps two");
  std::string path;
  for (const auto& o : order) path += (path.empty() ? "" : " -> ") + o;
  return c.verdict(path + ", one location layer per step, " + std::to_string(expect.size()) + "/" +
                   std::to_string(features.size()) + " features kept");
}

Verdict trends() {
  Check c;
  std::ifstream in(data("golden/battery10.csv"));
  c.require(static_cast<bool>(in), "golden file missing");
  std::map<std::string, std::vector<std::uint64_t>> golden;
  std::map<std::string, std::uint64_t> totals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("engine,", 0) == 0) continue;
    std::stringstream row(line);
    std::string engine, event, units;
    std::getline(row, engine, ',');
    std::getline(row, event, ',');
    std::getline(row, units, ',');
    if (event == "total")
      totals[engine] = std::stoull(units);
    else
      golden[engine].push_back(std::stoull(units));
  }
  const auto scenario = harness::load_scenario(data("battery10.scn"));
  const auto fx = ecampus::build_fixture();
  const auto cmp = harness::compare(scenario, fx, harness::default_joinpoints(), {});
  c.require(cmp.cosm.work_unit_series() == golden["cosm"], "cosm series differs from golden");
  c.require(cmp.daop.work_unit_series() == golden["daop"], "daop series differs from golden");
  c.require(cmp.cosm.totals.work_units == totals["cosm"] && cmp.daop.totals.work_units == totals["daop"],
            "totals differ from golden");
  c.require(cmp.daop_exceeds_cosm, "daop total not above cosm");
  c.require(cmp.daop_nondecreasing, "daop series decreases");
  c.require(cmp.daop_strictly_increasing, "daop series not strictly increasing");
  c.require(cmp.cosm_history_independent, "cosm cost depends on history");
  return c.verdict("cosm " + std::to_string(cmp.cosm.totals.work_units) + " < daop " +
                   std::to_string(cmp.daop.totals.work_units) + ", daop strictly increasing, cosm history-independent");
}

Verdict internal_vs_external() {
  Check c;
  Runtime internal;
  auto layer_plan = build_composition_plan(internal.mw.graph(), {{ActivateLayer{"LocationManager", "wifi"}}},
                                           {"exclusive:location"}, &internal.fx.factories);
  verification::verify_plan(internal.mw.graph(), internal.fx.factories, layer_plan);
  c.require(layer_plan.verified, "layer plan rejected");
  const auto a = execute_plan(internal.mw, layer_plan);

  Runtime external;
  auto load_plan = build_composition_plan(external.mw.graph(),
                                          {{LoadComponent{"WifiLocator"}, RebindDelegate{"MapView", "WifiLocator"}}}, {},
                                          &external.fx.factories);
  verification::verify_plan(external.mw.graph(), external.fx.factories, load_plan);
  c.require(load_plan.verified, "load plan rejected");
  const auto b = execute_plan(external.mw, load_plan);

  kernel::Message m1{"locationFix", {}, std::nullopt}, m2{"locationFix", {}, std::nullopt};
  c.require(kernel::send_message(internal.mw.app(), "MapView", m1) == Value{std::string("wifi")}, "layer variant not on wifi");
  c.require(kernel::send_message(external.mw.app(), "MapView", m2) == Value{std::string("wifi")}, "load variant not on wifi");
  c.require(a.work_units < b.work_units, "layer switch not cheaper");
  c.require(a.work_units <= 4 && b.work_units >= 25, "default-model bounds");
  return c.verdict("layer " + std::to_string(a.work_units) + " < load " + std::to_string(b.work_units) + " work-units");
}

struct PlanPair {
  std::string kind;
  std::vector<AdaptationAction> invalid;
  std::vector<AdaptationAction> valid;
  std::optional<double> max_components;
};

std::vector<PlanPair> plan_corpus() {
  using A = ActivateLayer;
  using D = DeactivateLayer;
  using L = LoadComponent;
  using I = InvokeSelector;
  const std::string lm = "LocationManager", ff = "FeatureFilter";
  return {
      {"dangling-layer", {A{lm, "lte"}}, {A{lm, "wifi"}, D{lm, "gps"}}, {}},
      {"dangling-layer", {D{ff, "medium"}}, {D{ff, "full"}, A{ff, "reduced"}}, {}},
      {"dangling-layer", {A{"MapView", "night"}}, {D{lm, "gps"}, A{lm, "cell"}}, {}},
      {"dangling-layer", {A{"Ghost", "gps"}}, {D{ff, "full"}, A{ff, "reduced"}, I{ff, "filterFeatures", {}}}, {}},
      {"dangling-layer", {L{"WifiLocator"}, A{"WifiLocator", "fast"}}, {L{"WifiLocator"}}, {}},
      {"missing-factory", {L{"Ghost"}}, {L{"OfflineMaps"}}, {}},
      {"missing-factory", {ReplaceComponent{lm, "Phantom"}}, {ReplaceComponent{lm, "WifiLocator"}}, {}},
      {"missing-factory", {L{"OfflineMaps"}, L{"Bundle9"}}, {L{"OfflineMaps"}, L{"WifiLocator"}}, {}},
      {"missing-factory", {L{"Ghost"}, RebindDelegate{"MapView", "Ghost"}},
       {L{"WifiLocator"}, RebindDelegate{"MapView", "WifiLocator"}}, {}},
      {"missing-factory", {ReplaceComponent{ff, "Ghost"}}, {ReplaceComponent{ff, "OfflineMaps"}}, {}},
      {"unresponsive-selector", {I{"MapView", "teleport", {}}}, {I{"MapView", "render", {}}}, {}},
      {"unresponsive-selector", {D{ff, "full"}, I{ff, "filterFeatures", {}}},
       {D{ff, "full"}, A{ff, "reduced"}, I{ff, "filterFeatures", {}}}, {}},
      {"unresponsive-selector", {D{lm, "gps"}, I{lm, "locationFix", {}}}, {D{lm, "gps"}, A{lm, "wifi"}, I{lm, "locationFix", {}}}, {}},
      {"unresponsive-selector", {L{"OfflineMaps"}, I{"OfflineMaps", "zoom", {}}}, {L{"OfflineMaps"}, I{"OfflineMaps", "render", {}}}, {}},
      {"unresponsive-selector", {I{lm, "fly", {}}}, {I{lm, "suspendUpdates", {}}}, {}},
      {"constraint", {L{"WifiLocator"}, L{"OfflineMaps"}}, {L{"WifiLocator"}}, 4.0},
      {"constraint", {L{"OfflineMaps"}}, {ReplaceComponent{lm, "WifiLocator"}}, 3.0},
      {"constraint", {A{lm, "wifi"}}, {A{lm, "wifi"}, D{lm, "gps"}}, {}},
      {"constraint", {A{ff, "reduced"}}, {A{ff, "reduced"}, D{ff, "full"}}, {}},
      {"constraint", {A{lm, "cell"}, D{lm, "cell"}}, {A{lm, "cell"}, D{lm, "gps"}}, {}},
  };
}

Verdict verification_gate() {
  Check c;
  const auto corpus = plan_corpus();
  std::size_t rejected = 0, executed = 0;
  std::uint64_t id = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& pair = corpus[i];
    const std::string tag = "#" + std::to_string(i + 1) + " " + pair.kind;
    {
      Runtime rt;
      if (pair.max_components) rt.mw.graph().config.set_property("maxComponents", *pair.max_components);
      const auto before = digest_of(rt.mw.graph());
      CompositionPlan plan;
      plan.id = ++id;
      plan.actions = pair.invalid;
      const auto outcome = verification::verify_plan(rt.mw.graph(), rt.fx.factories, plan);
      c.require(!outcome.verified && !plan.verified, tag + " invalid plan verified");
      if (!plan.verified) ++rejected;
      try {
        execute_plan(rt.mw, plan);
        c.require(false, tag + " invalid plan executed");
      } catch (const Error& e) {
        c.require(e.code() == ErrorCode::unverified_plan, tag + " unexpected error " + e.what());
      }
      c.require(rt.mw.log().empty(), tag + " log grew");
      c.require(digest_of(rt.mw.graph()) == before, tag + " digest changed");
    }
    {
      Runtime rt;
      if (pair.max_components) rt.mw.graph().config.set_property("maxComponents", *pair.max_components);
      const auto before = digest_of(rt.mw.graph());
      try {
        auto plan = build_composition_plan(rt.mw.graph(), {pair.valid}, {}, &rt.fx.factories);
        plan.id = ++id;
        const auto outcome = verification::verify_plan(rt.mw.graph(), rt.fx.factories, plan);
        c.require(plan.verified, tag + " valid twin rejected: " +
                                     (outcome.diagnostics.empty() ? "" : outcome.diagnostics.front().message));
        if (!plan.verified) continue;
        const auto rec = execute_plan(rt.mw, plan);
        ++executed;
        c.require(rec.before == before, tag + " record before-digest");
        c.require(rec.after == verification::apply_to_digest(before, plan.actions), tag + " digest delta");
        c.require(digest_of(rt.mw.graph()) == rec.after, tag + " graph digest");
        c.require(verification::state_transition_check(rec, plan.actions), tag + " transition check");
      } catch (const Error& e) {
        c.require(false, tag + " valid twin failed: " + e.what());
      }
    }
  }
  return c.verdict(std::to_string(rejected) + "/20 invalid rejected with digests unchanged, " + std::to_string(executed) +
                   "/20 twins executed with exact deltas");
}

Verdict idempotence() {
  Check c;
  Runtime rt;
  rt.mw.step("BatteryLevel", 50.0, 0);
  rt.mw.step("SleepMode", true, 1);
  const auto snapshot_before = context::snapshot(rt.mw.contexts());
  const auto units = rt.mw.work_units();
  const auto log_size = rt.mw.log().size();
  const auto failures = rt.mw.failures().size();

  for (const auto& [entity, value] : snapshot_before) {
    const auto rep = rt.mw.step(entity, value, 2);
    c.require(rep.dispatch.events == 0, "re-sensed " + entity + " emitted events");
  }
  c.require(rt.mw.work_units() == units, "work units grew on re-sensing");
  c.require(rt.mw.log().size() == log_size, "plans on re-sensing");

  const Ledger ledger = rt.mw.ledger();
  std::uint64_t seq = 1000;
  for (const auto& [entity, value] : snapshot_before)
    for (auto phase : {context::ChangePhase::will_change, context::ChangePhase::did_change})
      rt.mw.queue().push({entity, phase, value, value, 3, ++seq});
  const auto rep = rt.mw.pump();
  const Ledger growth = rt.mw.ledger() - ledger;
  const CostModel& cost = rt.mw.cost_model();
  c.require(rep.records.empty() && rt.mw.log().size() == log_size, "plans on re-dispatch");
  c.require(rt.mw.failures().size() == failures, "failures on re-dispatch");
  c.require(growth.work_units(cost, Phase::adaptation) == 0, "adaptation work on re-dispatch");
  return c.verdict("re-sense: 0 events, 0 work-units; re-dispatch of " + std::to_string(rep.dispatch.events) +
                   " events: 0 plans, adaptation +0, notification +" +
                   std::to_string(growth.work_units(cost, Phase::detection)) + ", decision +" +
                   std::to_string(growth.work_units(cost, Phase::decision)));
}

Verdict repeat_statistics() {
  Check c;
  const auto scenario = harness::load_scenario(data("battery10.scn"));
  const auto fx = ecampus::build_fixture();
  const auto reports = harness::run_repeats(scenario, harness::Mode::both, 200, 7, fx, harness::default_joinpoints(), {});
  const auto single = harness::compare(scenario, fx, harness::default_joinpoints(), {});
  c.require(reports.size() == 2, "expected two engines");
  std::string detail;
  for (const auto& r : reports) {
    const auto& base = r.engine == "cosm" ? single.cosm : single.daop;
    c.require(r.repeats && r.repeats->runs == 200, r.engine + " run count");
    if (!r.repeats) continue;
    c.require(r.repeats->work_units.variance == 0, r.engine + " variance nonzero");
    c.require(r.repeats->work_units.mean == static_cast<double>(base.totals.work_units), r.engine + " mean differs");
    c.require(r.totals.work_units == base.totals.work_units, r.engine + " per-run totals differ");
    c.require(r.errors.empty(), r.engine + " run errors");
    detail += (detail.empty() ? "" : ", ") + r.engine + " mean " + to_literal(r.repeats->work_units.mean) + " variance " +
              to_literal(r.repeats->work_units.variance);
  }
  return c.verdict("200 runs seed 7: " + detail);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"adl round-trip", adl_round_trip},
      {"observer filtering and FIFO", observer_filtering},
      {"policy oracle equivalence", policy_oracle},
      {"eCampus battery ladder", battery_ladder},
      {"trend reproduction", trends},
      {"internal vs external composition", internal_vs_external},
      {"verification gate and atomicity", verification_gate},
      {"idempotence", idempotence},
      {"repeat statistics", repeat_statistics},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
