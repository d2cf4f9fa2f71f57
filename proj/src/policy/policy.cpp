#include "cosm/policy/policy.hpp"

#include <set>

#include "cosm/adl/document.hpp"
#include "cosm/error.hpp"
#include "cosm/policy/repository.hpp"

namespace cosm::policy {

const InternalVar* DecisionPolicy::internal(std::string_view name) const {
  for (const auto& v : internals)
    if (v.name == name) return &v;
  return nullptr;
}

const ExternalVar* DecisionPolicy::external(std::string_view name) const {
  for (const auto& v : externals)
    if (v.name == name) return &v;
  return nullptr;
}

namespace {

void check_expr(const DecisionPolicy& p, const BoolExpr& e, const std::string& where,
                std::vector<std::string>& problems) {
  if (e.kind != BoolExpr::Kind::compare) {
    if (e.operands.empty() || (e.kind == BoolExpr::Kind::negate && e.operands.size() != 1))
      problems.push_back(where + ": malformed expression");
    for (const auto& o : e.operands) check_expr(p, o, where, problems);
    return;
  }
  if (is_ordering(e.op) && type_of(e.literal) != ValueType::number)
    problems.push_back(where + ": ordering comparison on non-numeric literal for '" + e.var + "'");
  if (const auto* iv = p.internal(e.var)) {
    if (type_of(e.literal) != iv->type)
      problems.push_back(where + ": literal type does not match internal variable '" + e.var + "'");
  } else if (!p.external(e.var)) {
    problems.push_back(where + ": undeclared variable '" + e.var + "'");
  }
}

void check_actions(const DecisionPolicy& p, const ActionList& actions, const std::string& where,
                   std::vector<std::string>& problems) {
  for (const auto& a : actions) {
    if (const auto* s = std::get_if<SetInternal>(&a)) {
      const auto* iv = p.internal(s->name);
      if (!iv)
        problems.push_back(where + ": set-internal on undeclared internal '" + s->name + "'");
      else if (type_of(s->value) != iv->type)
        problems.push_back(where + ": set-internal type mismatch for '" + s->name + "'");
    } else if (const auto* ev = std::get_if<EvaluatePolicy>(&a)) {
      if (!adl::is_valid_identifier(ev->id)) problems.push_back(where + ": bad chained policy id '" + ev->id + "'");
    }
  }
}

}  // namespace

std::vector<std::string> validate(const DecisionPolicy& p) {
  std::vector<std::string> problems;
  if (!adl::is_valid_identifier(p.id)) problems.push_back("bad policy id '" + p.id + "'");
  std::set<std::string> names;
  for (const auto& v : p.internals) {
    if (!adl::is_valid_identifier(v.name)) problems.push_back("bad variable name '" + v.name + "'");
    if (!names.insert(v.name).second) problems.push_back("duplicate variable '" + v.name + "'");
    if (type_of(v.initial) != v.type) problems.push_back("initial value type mismatch for '" + v.name + "'");
  }
  for (const auto& v : p.externals) {
    if (!adl::is_valid_identifier(v.name)) problems.push_back("bad variable name '" + v.name + "'");
    if (!names.insert(v.name).second) problems.push_back("duplicate variable '" + v.name + "'");
    if (!adl::is_valid_selector(v.entity)) problems.push_back("bad entity name '" + v.entity + "'");
  }
  if (p.rules.empty()) problems.push_back("policy '" + p.id + "' has no rules");
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    const auto& r = p.rules[i];
    const std::string where = "rule " + std::to_string(i);
    if (r.trigger && !adl::is_valid_selector(*r.trigger))
      problems.push_back(where + ": bad trigger selector '" + *r.trigger + "'");
    check_expr(p, r.condition, where, problems);
    check_actions(p, r.action, where, problems);
    check_actions(p, r.else_action, where, problems);
  }
  for (const auto& g : p.goals)
    if (g.property.empty()) problems.push_back("goal without property");
  return problems;
}

Internals initial_internals(const DecisionPolicy& p) {
  Internals out;
  for (const auto& v : p.internals) out[v.name] = v.initial;
  return out;
}

namespace {

EvaluationResult evaluate_at_depth(const DecisionPolicy& p, const Snapshot& ctx, const Internals& internals,
                                   const std::optional<std::string>& trigger, const PolicyRepository* repo,
                                   std::size_t depth) {
  for (const auto& ext : p.externals)
    if (!ctx.contains(ext.entity))
      throw Error(ErrorCode::unbound_external_variable,
                  "policy '" + p.id + "': entity '" + ext.entity + "' bound to '" + ext.name + "' not in context");

  EvaluationResult result;
  result.updated_internals = initial_internals(p);
  for (const auto& [name, value] : internals)
    if (p.internal(name)) result.updated_internals[name] = value;
  if (p.structure_style) result.styles.push_back(*p.structure_style);

  auto& working = result.updated_internals;
  const VariableLookup lookup = [&](std::string_view name) -> std::optional<Value> {
    if (auto it = working.find(name); it != working.end()) return it->second;
    if (const auto* ext = p.external(name)) return ctx.find(ext->entity)->second;
    return std::nullopt;
  };

  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    const Rule& rule = p.rules[i];
    if (rule.trigger && rule.trigger != trigger) continue;
    ++result.rules_evaluated;
    const bool holds = evaluate(rule.condition, lookup);
    result.fired.push_back({i, holds ? Branch::action : Branch::else_action});
    for (const auto& a : holds ? rule.action : rule.else_action) {
      result.actions.push_back(a);
      if (const auto* act = std::get_if<adaptation::AdaptationAction>(&a)) {
        result.adaptation_actions.push_back(*act);
      } else if (const auto* set = std::get_if<SetInternal>(&a)) {
        working[set->name] = set->value;
      } else if (const auto* chain = std::get_if<EvaluatePolicy>(&a); chain && repo) {
        if (depth + 1 > kMaxChainDepth)
          throw Error(ErrorCode::chain_depth_exceeded,
                      "policy '" + p.id + "' chains to '" + chain->id + "' beyond depth " +
                          std::to_string(kMaxChainDepth));
        const DecisionPolicy next = repo->get_policy_for_key(chain->id);
        EvaluationResult sub = evaluate_at_depth(next, ctx, initial_internals(next), trigger, repo, depth + 1);
        result.rules_evaluated += sub.rules_evaluated;
        result.chained.push_back(chain->id);
        result.chained.insert(result.chained.end(), sub.chained.begin(), sub.chained.end());
        result.styles.insert(result.styles.end(), sub.styles.begin(), sub.styles.end());
        result.adaptation_actions.insert(result.adaptation_actions.end(), sub.adaptation_actions.begin(),
                                         sub.adaptation_actions.end());
      }
    }
  }
  return result;
}

}  // namespace

EvaluationResult evaluate_policy(const DecisionPolicy& p, const Snapshot& ctx, const Internals& internals,
                                 const std::optional<std::string>& trigger, const PolicyRepository* repo) {
  return evaluate_at_depth(p, ctx, internals, trigger, repo, 0);
}

}  // namespace cosm::policy
