#include "cosm/adaptation/middleware.hpp"

#include <algorithm>
#include <chrono>

#include "cosm/error.hpp"

namespace cosm::adaptation {

Middleware::Middleware(const adl::Document& doc, kernel::FactoryRegistry factories, const EntitySeed& entities,
                       CostModel cost)
    : app_(adl::build_graph(doc, factories)), factories_(std::move(factories)), cost_(cost) {
  for (const auto& p : doc.policies) policies_.add_policy(p);
  for (const auto& [name, value] : entities) contexts_.add_entity(name, value);
  for (const auto& [id, c] : app_.graph.nodes)
    for (const auto& e : c.observes) contexts_.register_observer(id, e);
  app_.unrecognized_hook = [this](kernel::Application&, const std::string& target, kernel::Message& msg) {
    return recover_unrecognized(*this, target, msg);
  };
}

policy::Internals& Middleware::internals_for(const std::string& policy_id, const std::string& component) {
  auto key = std::make_pair(policy_id, component);
  auto it = internals_.find(key);
  if (it == internals_.end())
    it = internals_.emplace(key, policy::initial_internals(policies_.get_policy_for_key(policy_id))).first;
  return it->second;
}

verification::Gauges Middleware::gauges() const {
  verification::Gauges g;
  const auto n = app_.graph.nodes.size();
  g["component-count"] = static_cast<double>(n);
  g["memory-units"] = static_cast<double>(4 * n + app_.graph.active_layers().size());
  if (contexts_.has_entity("BatteryLevel")) g["battery"] = contexts_.entity("BatteryLevel").value;
  for (const auto& [k, v] : gauge_overrides_) g[k] = v;
  return g;
}

StepReport Middleware::pump() {
  StepReport report;
  while (!queue_.empty()) {
    auto d = context::dispatch(contexts_, queue_, app_, 1);
    Ledger deliveries;
    deliveries.add(Charge::notify_delivery, d.deliveries);
    charge(deliveries);
    report.charges += deliveries;
    auto outcome = on_context_notification(*this, d.processed);
    report.charges += outcome.charges;
    report.failures += outcome.failures;
    for (auto& r : outcome.records) report.records.push_back(std::move(r));
    report.dispatch.events += d.events;
    report.dispatch.deliveries += d.deliveries;
    report.dispatch.unhandled += d.unhandled;
    for (auto& e : d.processed) report.dispatch.processed.push_back(std::move(e));
    for (auto& t : d.trace) report.dispatch.trace.push_back(std::move(t));
  }
  return report;
}

StepReport Middleware::step(const std::string& entity, Value value, std::int64_t at) {
  context::sense(contexts_, queue_, entity, std::move(value), at);
  return pump();
}

namespace {

struct Proposal {
  std::vector<std::vector<AdaptationAction>> results;
  std::vector<std::string> styles;
  std::vector<std::string> diagnostics;
  Ledger evals;
};

/// Evaluates every policy attached to `components`, committing internals of
/// the policies that pass verification.
Proposal propose(Middleware& mw, const std::vector<std::string>& components,
                 const std::optional<std::string>& trigger) {
  Proposal out;
  const auto ctx = context::snapshot(mw.contexts());
  const auto gauges = mw.gauges();
  for (const auto& component : components) {
    auto it = mw.graph().attachments.find(component);
    if (it == mw.graph().attachments.end()) continue;
    for (const auto& policy_id : it->second) {
      if (!mw.policies().contains(policy_id)) continue;
      auto& internals = mw.internals_for(policy_id, component);
      auto pv = verification::verify_policy(mw.policies(), policy_id, ctx, internals, gauges, mw.graph().config,
                                            trigger, &mw.graph());
      out.evals.add(Charge::rule_eval, pv.evaluation.rules_evaluated);
      if (!pv.outcome.verified) {
        for (auto& m : pv.outcome.messages()) out.diagnostics.push_back(policy_id + "@" + component + ": " + m);
        continue;
      }
      internals = std::move(pv.evaluation.updated_internals);
      out.results.push_back(std::move(pv.evaluation.adaptation_actions));
      for (auto& s : pv.evaluation.styles) out.styles.push_back(std::move(s));
    }
  }
  return out;
}

/// Builds, verifies and executes one plan. Returns the record, or nullopt
/// when the plan is empty or fails (failures are logged).
std::optional<AdaptationRecord> adapt(Middleware& mw, Proposal proposal, std::vector<std::uint64_t> cause,
                                      std::size_t& failures) {
  auto fail = [&](std::uint64_t id, std::vector<std::string> diagnostics) {
    mw.append(PlanFailure{id, cause, std::move(diagnostics)});
    ++failures;
  };
  if (!proposal.diagnostics.empty()) fail(0, proposal.diagnostics);
  CompositionPlan plan;
  try {
    plan = build_composition_plan(mw.graph(), proposal.results, proposal.styles, &mw.factories());
  } catch (const Error& e) {
    fail(0, {e.what()});
    return std::nullopt;
  }
  if (plan.actions.empty()) return std::nullopt;
  plan.id = mw.next_plan_id();
  plan.cause = cause;
  auto outcome = verification::verify_plan(mw.graph(), mw.factories(), plan);
  if (!plan.verified) {
    fail(plan.id, outcome.messages());
    return std::nullopt;
  }
  mw.mark_verified(plan.id);
  try {
    return execute_plan(mw, plan);
  } catch (const Error& e) {
    fail(plan.id, {e.what()});
    return std::nullopt;
  }
}

std::vector<std::string> observers_in_graph(const Middleware& mw, const std::string& entity) {
  auto observers = mw.contexts().observers_of(entity);
  std::erase_if(observers, [&](const std::string& c) { return !mw.graph().node(c); });
  return observers;
}

}  // namespace

NotificationOutcome on_context_notification(Middleware& mw, const std::vector<context::ContextEvent>& events) {
  NotificationOutcome out;
  for (const auto& event : events) {
    auto proposal = propose(mw, observers_in_graph(mw, event.entity), event.selector());
    mw.charge(proposal.evals);
    out.charges += proposal.evals;
    if (auto record = adapt(mw, std::move(proposal), {event.seq}, out.failures)) {
      out.charges += record->charges;
      out.records.push_back(std::move(*record));
    }
  }
  return out;
}

namespace {

void restore_registrations(context::ContextRepository& repo,
                           const std::set<std::pair<std::string, std::string>>& saved) {
  for (const auto& [c, e] : repo.registrations())
    if (!saved.contains({c, e})) repo.unregister_observer(c, e);
  for (const auto& [c, e] : saved) repo.register_observer(c, e);
}

kernel::CocaComponent fresh_instance(Middleware& mw, const std::string& id) {
  auto c = kernel::instantiate(mw.factories(), id);
  for (auto& l : c.layers) l.active = false;
  c.delegate_target.reset();
  return c;
}

void install(Middleware& mw, kernel::CocaComponent c) {
  const std::string id = c.id;
  if (c.kind == adl::ComponentKind::base) mw.app().base_roster.insert(id);
  for (const auto& e : c.observes) mw.contexts().register_observer(id, e);
  mw.graph().nodes.insert_or_assign(id, std::move(c));
}

kernel::Layer& layer_of(Middleware& mw, const std::string& component, const std::string& layer) {
  auto* c = mw.graph().node(component);
  if (!c) throw Error(ErrorCode::component_not_found, "no component '" + component + "'");
  auto* l = c->layer(layer);
  if (!l) throw Error(ErrorCode::unresolvable_target, component + " has no layer '" + layer + "'");
  return *l;
}

void apply(Middleware& mw, const AdaptationAction& action) {
  auto& graph = mw.graph();
  if (const auto* a = std::get_if<ActivateLayer>(&action)) {
    layer_of(mw, a->component, a->layer).active = true;
  } else if (const auto* d = std::get_if<DeactivateLayer>(&action)) {
    layer_of(mw, d->component, d->layer).active = false;
  } else if (const auto* l = std::get_if<LoadComponent>(&action)) {
    if (graph.node(l->id)) throw Error(ErrorCode::duplicate_id, "'" + l->id + "' is already loaded");
    install(mw, fresh_instance(mw, l->id));
  } else if (const auto* r = std::get_if<ReplaceComponent>(&action)) {
    auto* old = graph.node(r->old_id);
    if (!old) throw Error(ErrorCode::component_not_found, "no component '" + r->old_id + "'");
    auto c = fresh_instance(mw, r->new_id);
    c.delegate_target = old->delegate_target;
    mw.contexts().unregister_component(r->old_id);
    mw.app().base_roster.erase(r->old_id);
    graph.nodes.erase(r->old_id);
    for (auto& [_, node] : graph.nodes)
      if (node.delegate_target == r->old_id) node.delegate_target = r->new_id;
    for (auto& e : graph.edges) {
      if (e.from == r->old_id) e.from = r->new_id;
      if (e.to == r->old_id) e.to = r->new_id;
    }
    install(mw, std::move(c));
  } else if (const auto* b = std::get_if<RebindDelegate>(&action)) {
    auto* c = graph.node(b->component);
    if (!c) throw Error(ErrorCode::component_not_found, "no component '" + b->component + "'");
    if (!graph.node(b->target)) throw Error(ErrorCode::component_not_found, "no component '" + b->target + "'");
    c->delegate_target = b->target;
    auto edge = std::find_if(graph.edges.begin(), graph.edges.end(), [&](const adl::ConnectorDecl& e) {
      return e.type == adl::ConnectorType::delegate && e.from == b->component;
    });
    if (edge != graph.edges.end()) edge->to = b->target;
    else graph.edges.push_back({b->component + "Delegate", b->component, b->target, adl::ConnectorType::delegate});
  } else if (const auto* i = std::get_if<InvokeSelector>(&action)) {
    kernel::Message msg{i->selector, i->args, std::nullopt};
    kernel::send_message(mw.app(), i->component, msg);
  }
}

}  // namespace

AdaptationRecord execute_plan(Middleware& mw, const CompositionPlan& plan) {
  if (!plan.verified) throw Error(ErrorCode::unverified_plan, "plan " + std::to_string(plan.id) + " is not verified");
  const auto start = std::chrono::steady_clock::now();
  AdaptationRecord record;
  record.plan_id = plan.id;
  record.actions = plan.actions;
  record.cause = plan.cause;
  record.before = digest_of(mw.graph());

  const adl::ComponentGraph saved_graph = mw.graph();
  const auto saved_roster = mw.app().base_roster;
  const auto saved_registrations = mw.contexts().registrations();
  try {
    for (const auto& action : plan.actions) {
      apply(mw, action);
      record.charges += charges_for(action);
      ++record.steps;
    }
  } catch (const Error& e) {
    mw.graph() = saved_graph;
    mw.app().base_roster = saved_roster;
    restore_registrations(mw.contexts(), saved_registrations);
    throw Error(ErrorCode::action_failure, "plan " + std::to_string(plan.id) + " rolled back: " + e.what());
  }
  adl::refresh_inheritance(mw.graph());
  record.after = digest_of(mw.graph());
  record.work_units = record.charges.work_units(mw.cost_model());
  record.wall_time = std::chrono::steady_clock::now() - start;
  mw.charge(record.charges);
  mw.append(record);
  return record;
}

Value recover_unrecognized(Middleware& mw, const std::string& target, kernel::Message& msg) {
  if (mw.graph().node(target)) {
    auto proposal = propose(mw, {target}, msg.selector);
    mw.charge(proposal.evals);
    std::size_t failures = 0;
    adapt(mw, std::move(proposal), {}, failures);
    if (auto v = kernel::try_send(mw.app(), target, msg)) return *v;
  }
  throw Error(ErrorCode::does_not_recognize_selector, target + " does not recognize '" + msg.selector + "'");
}

}  // namespace cosm::adaptation
