#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cosm/adaptation/action.hpp"
#include "cosm/policy/expr.hpp"
#include "cosm/value.hpp"

namespace cosm::policy {

struct SetInternal {
  std::string name;
  Value value;
  friend bool operator==(const SetInternal&, const SetInternal&) = default;
};

struct EvaluatePolicy {
  std::string id;
  friend bool operator==(const EvaluatePolicy&, const EvaluatePolicy&) = default;
};

using PolicyAction = std::variant<adaptation::AdaptationAction, SetInternal, EvaluatePolicy>;
using ActionList = std::vector<PolicyAction>;

struct InternalVar {
  std::string name;
  ValueType type = ValueType::number;
  Value initial = 0.0;
  friend bool operator==(const InternalVar&, const InternalVar&) = default;
};

struct ExternalVar {
  std::string name;
  std::string entity;
  friend bool operator==(const ExternalVar&, const ExternalVar&) = default;
};

struct Rule {
  std::optional<std::string> trigger;
  BoolExpr condition;
  ActionList action;
  ActionList else_action;
  friend bool operator==(const Rule&, const Rule&) = default;
};

/// A quality or resource constraint, e.g. `memory-units <= 100`.
struct Goal {
  std::string property;
  CompareOp op = CompareOp::le;
  Value limit = 0.0;
  friend bool operator==(const Goal&, const Goal&) = default;
};

struct DecisionPolicy {
  std::string id;
  std::string suit;
  std::vector<InternalVar> internals;
  std::vector<ExternalVar> externals;
  std::vector<Rule> rules;
  std::vector<Goal> goals;
  std::optional<std::string> structure_style;

  const InternalVar* internal(std::string_view name) const;
  const ExternalVar* external(std::string_view name) const;

  friend bool operator==(const DecisionPolicy&, const DecisionPolicy&) = default;
};

/// Invariant violations of a policy, empty when valid: unique variable
/// names, nonempty rule list, rules only mention declared variables,
/// literal types agree with internal variable types, ordering comparisons
/// against internals are numeric, set-internal targets exist and match type.
std::vector<std::string> validate(const DecisionPolicy& p);

using Internals = std::map<std::string, Value, std::less<>>;
using Snapshot = std::map<std::string, Value, std::less<>>;

Internals initial_internals(const DecisionPolicy& p);

enum class Branch { action, else_action };

struct FiredRule {
  std::size_t index = 0;
  Branch branch = Branch::action;
  friend bool operator==(const FiredRule&, const FiredRule&) = default;
};

struct EvaluationResult {
  std::vector<FiredRule> fired;
  /// Concatenated branch contents in rule order, chaining markers included.
  ActionList actions;
  /// Adaptation actions with evaluate-policy chains expanded.
  std::vector<adaptation::AdaptationAction> adaptation_actions;
  Internals updated_internals;
  /// Number of rule conditions evaluated, chained policies included.
  std::size_t rules_evaluated = 0;
  std::vector<std::string> chained;
  std::vector<std::string> styles;
};

inline constexpr std::size_t kMaxChainDepth = 8;

class PolicyRepository;

/// Evaluates `p` against a context snapshot. Participating rules are those
/// without a trigger or whose trigger equals `trigger`. set-internal effects
/// are visible to later rules. evaluate-policy markers are expanded through
/// `repo` when given, up to kMaxChainDepth hops.
EvaluationResult evaluate_policy(const DecisionPolicy& p, const Snapshot& ctx,
                                 const Internals& internals,
                                 const std::optional<std::string>& trigger,
                                 const PolicyRepository* repo = nullptr);

}  // namespace cosm::policy
