#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cosm/adaptation/plan.hpp"
#include "cosm/adl/graph.hpp"
#include "cosm/kernel/component.hpp"
#include "cosm/policy/repository.hpp"

namespace cosm::verification {

enum class Severity { info, warning, error };

std::string_view to_string(Severity s);

struct Diagnostic {
  Severity severity = Severity::error;
  std::string code;
  std::string message;
  std::string subject;
};

/// `verified` is true iff there is no error-severity diagnostic.
struct VerificationOutcome {
  bool verified = true;
  std::vector<Diagnostic> diagnostics;

  void add(Severity severity, std::string code, std::string message, std::string subject = {});
  std::vector<std::string> messages() const;
};

struct ConstraintCheck {
  std::string property;
  policy::CompareOp op = policy::CompareOp::le;
  Value limit;
  std::optional<Value> observed;
  bool passed = false;
};

using Gauges = std::map<std::string, Value, std::less<>>;

struct PolicyVerification {
  VerificationOutcome outcome;
  policy::EvaluationResult evaluation;
  std::vector<ConstraintCheck> constraints;
};

/// Retrieves and evaluates the policy, then checks its goals against the
/// gauges (falling back to configuration properties). When `graph` is given,
/// the proposed actions' targets are checked too. Throws
/// Error{policy_not_found}; evaluation errors become diagnostics.
PolicyVerification verify_policy(const policy::PolicyRepository& repo, const std::string& policy_id,
                                 const policy::Snapshot& ctx, const policy::Internals& internals,
                                 const Gauges& gauges, const adl::ConfigDecl& config,
                                 const std::optional<std::string>& trigger = std::nullopt,
                                 const adl::ComponentGraph* graph = nullptr);

/// Structural verification against the simulated post-plan state: targets
/// exist (or have factories), layers exist, invoked selectors respond,
/// rebound delegates conform, exclusive groups hold, `maxComponents` is not
/// exceeded, no layer is both activated and deactivated. Sets plan.verified.
VerificationOutcome verify_plan(const adl::ComponentGraph& graph,
                                const kernel::FactoryRegistry& factories,
                                adaptation::CompositionPlan& plan);

/// Applies `actions` to a digest without touching any graph.
adaptation::StateDigest apply_to_digest(adaptation::StateDigest digest,
                                        const std::vector<adaptation::AdaptationAction>& actions);

/// True iff record.after equals `expected` applied to record.before.
bool state_transition_check(const adaptation::AdaptationRecord& record,
                            const std::vector<adaptation::AdaptationAction>& expected);

}  // namespace cosm::verification
