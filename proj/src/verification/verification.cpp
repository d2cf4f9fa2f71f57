#include "cosm/verification/verification.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "cosm/error.hpp"

namespace cosm::verification {

using namespace adaptation;

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::info: return "info";
    case Severity::warning: return "warning";
    case Severity::error: return "error";
  }
  return "error";
}

void VerificationOutcome::add(Severity severity, std::string code, std::string message, std::string subject) {
  if (severity == Severity::error) verified = false;
  diagnostics.push_back({severity, std::move(code), std::move(message), std::move(subject)});
}

std::vector<std::string> VerificationOutcome::messages() const {
  std::vector<std::string> out;
  for (const auto& d : diagnostics)
    out.push_back(std::string(to_string(d.severity)) + " " + d.code + ": " + d.message);
  return out;
}

namespace {

void check_targets(const adl::ComponentGraph& graph, const std::vector<AdaptationAction>& actions,
                   VerificationOutcome& out) {
  auto layer_exists = [&](const std::string& c, const std::string& l) {
    const auto* node = graph.node(c);
    if (!node) {
      out.add(Severity::error, "unresolvable-target", "unknown component '" + c + "'", c);
      return;
    }
    if (!node->layer(l)) out.add(Severity::error, "unresolvable-target", c + " has no layer '" + l + "'", c + "." + l);
  };
  for (const auto& action : actions) {
    if (const auto* a = std::get_if<ActivateLayer>(&action)) layer_exists(a->component, a->layer);
    else if (const auto* d = std::get_if<DeactivateLayer>(&action)) layer_exists(d->component, d->layer);
    else if (const auto* r = std::get_if<RebindDelegate>(&action)) {
      if (!graph.node(r->component))
        out.add(Severity::error, "unresolvable-target", "unknown component '" + r->component + "'", r->component);
    } else if (const auto* i = std::get_if<InvokeSelector>(&action)) {
      if (!graph.node(i->component))
        out.add(Severity::error, "unresolvable-target", "unknown component '" + i->component + "'", i->component);
    }
  }
}

}  // namespace

PolicyVerification verify_policy(const policy::PolicyRepository& repo, const std::string& policy_id,
                                 const policy::Snapshot& ctx, const policy::Internals& internals,
                                 const Gauges& gauges, const adl::ConfigDecl& config,
                                 const std::optional<std::string>& trigger, const adl::ComponentGraph* graph) {
  PolicyVerification result;
  const policy::DecisionPolicy p = repo.get_policy_for_key(policy_id);
  try {
    result.evaluation = policy::evaluate_policy(p, ctx, internals, trigger, &repo);
  } catch (const Error& e) {
    result.outcome.add(Severity::error, std::string(to_string(e.code())), e.what(), policy_id);
    return result;
  }
  for (const auto& goal : p.goals) {
    ConstraintCheck check{goal.property, goal.op, goal.limit, std::nullopt, false};
    if (auto it = gauges.find(goal.property); it != gauges.end()) check.observed = it->second;
    else if (const Value* v = config.property(goal.property)) check.observed = *v;
    if (!check.observed) {
      result.outcome.add(Severity::error, "unknown-property", "no gauge or property '" + goal.property + "'",
                         goal.property);
    } else {
      try {
        check.passed = policy::compare_values(*check.observed, goal.op, goal.limit);
        if (!check.passed)
          result.outcome.add(Severity::error, "constraint",
                             goal.property + " = " + to_literal(*check.observed) + " violates " +
                                 std::string(policy::to_string(goal.op)) + " " + to_literal(goal.limit),
                             goal.property);
      } catch (const Error& e) {
        result.outcome.add(Severity::error, "type-error", e.what(), goal.property);
      }
    }
    result.constraints.push_back(std::move(check));
  }
  if (graph) check_targets(*graph, result.evaluation.adaptation_actions, result.outcome);
  return result;
}

VerificationOutcome verify_plan(const adl::ComponentGraph& graph, const kernel::FactoryRegistry& factories,
                                CompositionPlan& plan) {
  VerificationOutcome out;
  std::map<std::string, kernel::CocaComponent, std::less<>> sim = graph.nodes;
  std::map<std::pair<std::string, std::string>, std::set<bool>> toggles;
  std::vector<const InvokeSelector*> invocations;

  auto toggle = [&](const std::string& c, const std::string& l, bool on) {
    auto it = sim.find(c);
    if (it == sim.end()) {
      out.add(Severity::error, "unknown-component", "no component '" + c + "'", c);
      return;
    }
    auto* layer = it->second.layer(l);
    if (!layer) {
      out.add(Severity::error, "unknown-layer", c + " has no layer '" + l + "'", c + "." + l);
      return;
    }
    layer->active = on;
    toggles[{c, l}].insert(on);
  };
  auto fresh = [&](const std::string& id) -> std::optional<kernel::CocaComponent> {
    if (!factories.contains(id)) {
      out.add(Severity::error, "missing-factory", "no factory registered for '" + id + "'", id);
      return std::nullopt;
    }
    try {
      auto c = kernel::instantiate(factories, id);
      for (auto& l : c.layers) l.active = false;
      c.delegate_target.reset();
      return c;
    } catch (const Error& e) {
      out.add(Severity::error, "factory-mismatch", e.what(), id);
      return std::nullopt;
    }
  };

  for (const auto& action : plan.actions) {
    if (const auto* a = std::get_if<ActivateLayer>(&action)) {
      toggle(a->component, a->layer, true);
    } else if (const auto* d = std::get_if<DeactivateLayer>(&action)) {
      toggle(d->component, d->layer, false);
    } else if (const auto* l = std::get_if<LoadComponent>(&action)) {
      if (sim.contains(l->id)) {
        out.add(Severity::error, "duplicate-component", "'" + l->id + "' is already loaded", l->id);
        continue;
      }
      if (auto c = fresh(l->id)) sim.emplace(l->id, std::move(*c));
    } else if (const auto* r = std::get_if<ReplaceComponent>(&action)) {
      auto old = sim.find(r->old_id);
      if (old == sim.end()) {
        out.add(Severity::error, "unknown-component", "no component '" + r->old_id + "'", r->old_id);
        continue;
      }
      if (r->new_id != r->old_id && sim.contains(r->new_id)) {
        out.add(Severity::error, "duplicate-component", "'" + r->new_id + "' is already loaded", r->new_id);
        continue;
      }
      auto c = fresh(r->new_id);
      if (!c) continue;
      c->delegate_target = old->second.delegate_target;
      sim.erase(old);
      for (auto& [_, node] : sim)
        if (node.delegate_target == r->old_id) node.delegate_target = r->new_id;
      sim.insert_or_assign(r->new_id, std::move(*c));
    } else if (const auto* b = std::get_if<RebindDelegate>(&action)) {
      auto src = sim.find(b->component);
      auto dst = sim.find(b->target);
      if (src == sim.end()) {
        out.add(Severity::error, "unknown-component", "no component '" + b->component + "'", b->component);
      } else if (dst == sim.end()) {
        out.add(Severity::error, "unknown-component", "no component '" + b->target + "'", b->target);
      } else if (!kernel::conforms_to_protocol(dst->second, src->second.protocol)) {
        out.add(Severity::error, "nonconforming-delegate",
                b->target + " does not conform to the protocol of " + b->component, b->target);
      } else {
        src->second.delegate_target = b->target;
      }
    } else if (const auto* i = std::get_if<InvokeSelector>(&action)) {
      invocations.push_back(i);
    }
  }

  for (const auto* i : invocations) {
    auto it = sim.find(i->component);
    if (it == sim.end()) {
      out.add(Severity::error, "unknown-component", "no component '" + i->component + "'", i->component);
    } else if (!kernel::responds_to_selector(it->second, i->selector, true)) {
      out.add(Severity::error, "does-not-respond", i->component + " does not respond to '" + i->selector + "'",
              i->component + "." + i->selector);
    }
  }

  for (const auto& [key, states] : toggles)
    if (states.size() > 1)
      out.add(Severity::error, "conflicting-toggles", "layer both activated and deactivated",
              key.first + "." + key.second);

  for (const auto& [id, c] : sim) {
    std::map<std::string, int> active;
    for (const auto& l : c.layers)
      if (l.active && l.exclusive) ++active[*l.exclusive];
    for (const auto& [group, n] : active)
      if (n > 1)
        out.add(Severity::error, "exclusive-group",
                id + " would have " + std::to_string(n) + " active layers in group '" + group + "'", id);
  }

  if (const Value* max = graph.config.property("maxComponents"); max && std::holds_alternative<double>(*max)) {
    if (static_cast<double>(sim.size()) > std::get<double>(*max))
      out.add(Severity::error, "constraint",
              "component count " + std::to_string(sim.size()) + " exceeds maxComponents " + to_literal(*max),
              "maxComponents");
  }

  for (const auto& s : plan.unknown_styles)
    out.add(Severity::warning, "unknown-style", "structure style '" + s + "' has no semantics", s);

  plan.verified = out.verified;
  return out;
}

StateDigest apply_to_digest(StateDigest digest, const std::vector<AdaptationAction>& actions) {
  for (const auto& action : actions) {
    if (const auto* a = std::get_if<ActivateLayer>(&action)) {
      digest.active_layers.insert({a->component, a->layer});
    } else if (const auto* d = std::get_if<DeactivateLayer>(&action)) {
      digest.active_layers.erase({d->component, d->layer});
    } else if (const auto* l = std::get_if<LoadComponent>(&action)) {
      digest.roster.insert(l->id);
    } else if (const auto* r = std::get_if<ReplaceComponent>(&action)) {
      digest.roster.erase(r->old_id);
      digest.roster.insert(r->new_id);
      std::erase_if(digest.active_layers, [&](const adl::Activation& a) { return a.component == r->old_id; });
      if (auto it = digest.delegates.find(r->old_id); it != digest.delegates.end()) {
        std::string target = it->second;
        digest.delegates.erase(it);
        digest.delegates[r->new_id] = target;
      }
      for (auto& [_, target] : digest.delegates)
        if (target == r->old_id) target = r->new_id;
    } else if (const auto* b = std::get_if<RebindDelegate>(&action)) {
      digest.delegates[b->component] = b->target;
    }
  }
  return digest;
}

bool state_transition_check(const AdaptationRecord& record, const std::vector<AdaptationAction>& expected) {
  return apply_to_digest(record.before, expected) == record.after;
}

}  // namespace cosm::verification
