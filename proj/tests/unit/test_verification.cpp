#include <doctest.h>

#include "cosm/adaptation/middleware.hpp"
#include "cosm/ecampus/ecampus.hpp"
#include "cosm/error.hpp"
#include "cosm/verification/verification.hpp"
#include "gen.hpp"

using namespace cosm;
using namespace cosm::adaptation;
using namespace cosm::verification;

namespace {

struct Runtime {
  ecampus::Fixture fx = ecampus::build_fixture();
  Middleware mw{fx.doc, fx.factories, fx.entities};
};

CompositionPlan plan_of(std::vector<AdaptationAction> actions) {
  CompositionPlan p;
  p.id = 1;
  p.actions = std::move(actions);
  return p;
}

bool has_code(const VerificationOutcome& o, const std::string& code) {
  return std::any_of(o.diagnostics.begin(), o.diagnostics.end(), [&](const Diagnostic& d) { return d.code == code; });
}

policy::DecisionPolicy memory_policy(double limit) {
  policy::DecisionPolicy p;
  p.id = "mem";
  p.externals = {{"battery", "BatteryLevel"}};
  p.rules.push_back({std::nullopt, policy::parse_expr("battery >= 70"), {ActivateLayer{"LocationManager", "gps"}},
                     {ActivateLayer{"LocationManager", "cell"}}});
  p.goals.push_back({"memory-units", policy::CompareOp::le, limit});
  return p;
}

}  // namespace

TEST_CASE("outcome is verified iff no error diagnostic") {
  VerificationOutcome o;
  CHECK(o.verified);
  o.add(Severity::info, "note", "fine");
  o.add(Severity::warning, "unknown-style", "odd");
  CHECK(o.verified);
  o.add(Severity::error, "constraint", "bad");
  CHECK_FALSE(o.verified);
  CHECK(o.messages().size() == 3);
}

TEST_CASE("verify_policy checks goals against gauges") {
  policy::PolicyRepository repo;
  repo.add_policy(memory_policy(100));
  const policy::Snapshot ctx{{"BatteryLevel", 90.0}};
  const adl::ConfigDecl config;

  const auto ok = verify_policy(repo, "mem", ctx, {}, {{"memory-units", 40.0}}, config);
  CHECK(ok.outcome.verified);
  CHECK(ok.evaluation.fired == std::vector<policy::FiredRule>{{0, policy::Branch::action}});
  CHECK(ok.evaluation.adaptation_actions == std::vector<AdaptationAction>{ActivateLayer{"LocationManager", "gps"}});
  REQUIRE(ok.constraints.size() == 1);
  CHECK(ok.constraints[0].passed);

  const auto over = verify_policy(repo, "mem", ctx, {}, {{"memory-units", 120.0}}, config);
  CHECK_FALSE(over.outcome.verified);
  CHECK(has_code(over.outcome, "constraint"));
  CHECK(over.constraints[0].observed == Value{120.0});

  const auto missing = verify_policy(repo, "mem", ctx, {}, {}, config);
  CHECK_FALSE(missing.outcome.verified);
  CHECK(has_code(missing.outcome, "unknown-property"));

  adl::ConfigDecl with_property;
  with_property.set_property("memory-units", 10.0);
  CHECK(verify_policy(repo, "mem", ctx, {}, {}, with_property).outcome.verified);

  const auto unbound = verify_policy(repo, "mem", {}, {}, {{"memory-units", 1.0}}, config);
  CHECK_FALSE(unbound.outcome.verified);
  CHECK(has_code(unbound.outcome, "unbound-external-variable"));

  try {
    verify_policy(repo, "nope", ctx, {}, {}, config);
    FAIL("verified an unknown policy");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::policy_not_found);
  }
}

TEST_CASE("verify_policy resolves action targets against the graph") {
  Runtime rt;
  auto p = memory_policy(100);
  p.rules[0].action = {ActivateLayer{"LocationManager", "lte"}};
  policy::PolicyRepository repo;
  repo.add_policy(p);
  const auto out = verify_policy(repo, "mem", {{"BatteryLevel", 90.0}}, {}, rt.mw.gauges(), {}, std::nullopt,
                                 &rt.mw.graph());
  CHECK_FALSE(out.outcome.verified);
  CHECK(has_code(out.outcome, "unresolvable-target"));
}

TEST_CASE("verify_plan accepts toggles of existing layers") {
  Runtime rt;
  auto plan = plan_of({DeactivateLayer{"LocationManager", "gps"}, ActivateLayer{"LocationManager", "wifi"}});
  const auto out = verify_plan(rt.mw.graph(), rt.fx.factories, plan);
  CHECK(out.verified);
  CHECK(plan.verified);
}

TEST_CASE("verify_plan diagnostics") {
  Runtime rt;
  const auto& g = rt.mw.graph();
  const auto& f = rt.fx.factories;
  auto check = [&](std::vector<AdaptationAction> actions, const std::string& code) {
    auto plan = plan_of(std::move(actions));
    plan.verified = true;
    const auto out = verify_plan(g, f, plan);
    CHECK_MESSAGE(!out.verified, code);
    CHECK_FALSE(plan.verified);
    CHECK_MESSAGE(has_code(out, code), code);
  };
  check({InvokeSelector{"MapView", "teleport", {}}}, "does-not-respond");
  check({InvokeSelector{"FeatureFilter", "filterFeatures", {}}, DeactivateLayer{"FeatureFilter", "full"}}, "does-not-respond");
  check({ActivateLayer{"Ghost", "gps"}}, "unknown-component");
  check({ActivateLayer{"LocationManager", "lte"}}, "unknown-layer");
  check({LoadComponent{"Ghost"}}, "missing-factory");
  check({LoadComponent{"MapView"}}, "duplicate-component");
  check({ActivateLayer{"LocationManager", "wifi"}}, "exclusive-group");
  check({ActivateLayer{"FeatureFilter", "reduced"}, DeactivateLayer{"FeatureFilter", "reduced"}}, "conflicting-toggles");
  check({LoadComponent{"OfflineMaps"}, RebindDelegate{"MapView", "OfflineMaps"}}, "nonconforming-delegate");
}

TEST_CASE("responds-to is judged on the post-plan state") {
  Runtime rt;
  execute_plan(rt.mw, [] {
    auto p = plan_of({DeactivateLayer{"FeatureFilter", "full"}});
    p.verified = true;
    return p;
  }());
  auto plan = plan_of({ActivateLayer{"FeatureFilter", "reduced"}, InvokeSelector{"FeatureFilter", "filterFeatures", {}}});
  CHECK(verify_plan(rt.mw.graph(), rt.fx.factories, plan).verified);
  auto pre_only = plan_of({InvokeSelector{"FeatureFilter", "filterFeatures", {}}});
  CHECK_FALSE(verify_plan(rt.mw.graph(), rt.fx.factories, pre_only).verified);
}

TEST_CASE("maxComponents bounds the post-state") {
  Runtime rt;
  auto graph = rt.mw.graph();
  graph.config.set_property("maxComponents", 4.0);
  auto one = plan_of({LoadComponent{"WifiLocator"}});
  CHECK(verify_plan(graph, rt.fx.factories, one).verified);
  auto two = plan_of({LoadComponent{"WifiLocator"}, LoadComponent{"OfflineMaps"}});
  const auto out = verify_plan(graph, rt.fx.factories, two);
  CHECK_FALSE(out.verified);
  CHECK(has_code(out, "constraint"));
  graph.config.set_property("maxComponents", 5.0);
  CHECK(verify_plan(graph, rt.fx.factories, two).verified);
}

TEST_CASE("unknown styles only warn") {
  Runtime rt;
  auto plan = plan_of({ActivateLayer{"FeatureFilter", "reduced"}, DeactivateLayer{"FeatureFilter", "full"}});
  plan.unknown_styles = {"pipeline"};
  const auto out = verify_plan(rt.mw.graph(), rt.fx.factories, plan);
  CHECK(out.verified);
  CHECK(has_code(out, "unknown-style"));
}

TEST_CASE("state transition check") {
  Runtime rt;
  auto plan = plan_of({DeactivateLayer{"LocationManager", "gps"}, ActivateLayer{"LocationManager", "cell"}});
  REQUIRE(verify_plan(rt.mw.graph(), rt.fx.factories, plan).verified);
  const auto rec = execute_plan(rt.mw, plan);
  CHECK(state_transition_check(rec, plan.actions));
  auto tampered = rec;
  tampered.after.active_layers.insert({"LocationManager", "gps"});
  CHECK_FALSE(state_transition_check(tampered, plan.actions));
  CHECK_FALSE(state_transition_check(rec, {}));
  AdaptationRecord empty;
  empty.before = empty.after = digest_of(rt.mw.graph());
  CHECK(state_transition_check(empty, {}));
}

TEST_CASE("apply_to_digest tracks loads, replacements and rebinds") {
  StateDigest d;
  d.roster = {"A", "B"};
  d.delegates = {{"A", "B"}};
  d.active_layers = {{"B", "x"}};
  const auto out = apply_to_digest(d, {LoadComponent{"C"}, ReplaceComponent{"B", "D"}, RebindDelegate{"C", "A"}});
  CHECK(out.roster == std::set<std::string>{"A", "C", "D"});
  CHECK(out.delegates == std::map<std::string, std::string>{{"A", "D"}, {"C", "A"}});
  CHECK(out.active_layers.empty());
  CHECK(d.roster.size() == 2);
}

TEST_CASE("outcomes are deterministic") {
  Runtime rt;
  gen::Rng rng(17);
  const std::vector<AdaptationAction> pool{
      ActivateLayer{"LocationManager", "wifi"}, DeactivateLayer{"LocationManager", "gps"}, LoadComponent{"Ghost"},
      LoadComponent{"WifiLocator"},             InvokeSelector{"MapView", "render", {}},    InvokeSelector{"MapView", "x", {}},
      RebindDelegate{"MapView", "WifiLocator"}, ActivateLayer{"FeatureFilter", "reduced"}};
  for (int round = 0; round < 300; ++round) {
    std::vector<AdaptationAction> actions;
    for (std::size_t i = 0, n = gen::below(rng, 5); i < n; ++i) actions.push_back(gen::pick(rng, pool));
    auto a = plan_of(actions);
    auto b = plan_of(actions);
    const auto oa = verify_plan(rt.mw.graph(), rt.fx.factories, a);
    const auto ob = verify_plan(rt.mw.graph(), rt.fx.factories, b);
    REQUIRE(oa.verified == ob.verified);
    REQUIRE(oa.messages() == ob.messages());
  }
}

TEST_CASE("rejected plans never execute") {
  Runtime rt;
  rt.mw.set_gauge("memory-units", 1000.0);
  rt.mw.step("BatteryLevel", 50.0, 0);
  CHECK(rt.mw.log().empty());
  CHECK_FALSE(rt.mw.failures().empty());
  CHECK(ecampus::active_location_source(*rt.mw.graph().node("LocationManager")) == ecampus::LocationSource::gps);
}
