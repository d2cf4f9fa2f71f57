#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cosm/adaptation/plan.hpp"
#include "cosm/adl/document.hpp"
#include "cosm/context/context.hpp"
#include "cosm/cost.hpp"
#include "cosm/kernel/application.hpp"
#include "cosm/policy/repository.hpp"
#include "cosm/verification/verification.hpp"

namespace cosm::adaptation {

using EntitySeed = std::vector<std::pair<std::string, Value>>;

/// Result of one sense -> dispatch -> adapt cycle.
struct StepReport {
  context::DispatchReport dispatch;
  std::vector<AdaptationRecord> records;
  std::size_t failures = 0;
  Ledger charges;
};

/// The assembled runtime: application singleton plus the context, policy
/// and component repositories, the adaptation log and the charge ledger.
/// Installs itself as the application's unrecognized-selector hook, so it is
/// pinned in memory.
class Middleware {
 public:
  Middleware(const adl::Document& doc, kernel::FactoryRegistry factories, const EntitySeed& entities,
             CostModel cost = {});
  Middleware(const Middleware&) = delete;
  Middleware& operator=(const Middleware&) = delete;

  kernel::Application& app() { return app_; }
  const kernel::Application& app() const { return app_; }
  adl::ComponentGraph& graph() { return app_.graph; }
  const adl::ComponentGraph& graph() const { return app_.graph; }
  context::ContextRepository& contexts() { return contexts_; }
  const context::ContextRepository& contexts() const { return contexts_; }
  context::EventQueue& queue() { return queue_; }
  policy::PolicyRepository& policies() { return policies_; }
  const policy::PolicyRepository& policies() const { return policies_; }
  const kernel::FactoryRegistry& factories() const { return factories_; }
  const CostModel& cost_model() const { return cost_; }

  const Ledger& ledger() const { return ledger_; }
  void charge(const Ledger& l) { ledger_ += l; }
  std::uint64_t work_units() const { return ledger_.work_units(cost_); }

  const std::vector<AdaptationRecord>& log() const { return log_; }
  const std::vector<PlanFailure>& failures() const { return failures_; }
  void append(AdaptationRecord record) { log_.push_back(std::move(record)); }
  void append(PlanFailure failure) { failures_.push_back(std::move(failure)); }

  /// Ids of plans that passed verification; every logged record is in it.
  const std::vector<std::uint64_t>& verified_plan_ids() const { return verified_ids_; }
  void mark_verified(std::uint64_t id) { verified_ids_.push_back(id); }

  std::uint64_t next_plan_id() { return ++plan_counter_; }

  /// Persistent internal variables of a (policy, component) attachment.
  policy::Internals& internals_for(const std::string& policy_id, const std::string& component);
  const std::map<std::pair<std::string, std::string>, policy::Internals>& all_internals() const {
    return internals_;
  }
  void restore_internals(std::map<std::pair<std::string, std::string>, policy::Internals> v) {
    internals_ = std::move(v);
  }

  /// Simulated resource gauges: component-count, memory-units (4 per
  /// component plus 1 per active layer), battery (BatteryLevel when
  /// present); explicit overrides win.
  verification::Gauges gauges() const;
  void set_gauge(std::string name, Value v) { gauge_overrides_[std::move(name)] = std::move(v); }

  /// Dispatches pending events and runs adaptation for them, charging
  /// deliveries, rule evaluations and plan actions.
  StepReport pump();

  /// sense + pump.
  StepReport step(const std::string& entity, Value value, std::int64_t at);

 private:
  kernel::Application app_;
  kernel::FactoryRegistry factories_;
  context::ContextRepository contexts_;
  context::EventQueue queue_;
  policy::PolicyRepository policies_;
  CostModel cost_;
  Ledger ledger_;
  std::vector<AdaptationRecord> log_;
  std::vector<PlanFailure> failures_;
  std::vector<std::uint64_t> verified_ids_;
  std::uint64_t plan_counter_ = 0;
  std::map<std::pair<std::string, std::string>, policy::Internals> internals_;
  verification::Gauges gauge_overrides_;
};

struct NotificationOutcome {
  std::vector<AdaptationRecord> records;
  std::size_t failures = 0;
  Ledger charges;
};

/// For each event: evaluates the policies attached to components observing
/// its entity (trigger = the event selector), builds one plan, verifies it
/// and executes it when verified and nonempty. Empty plans leave no record.
NotificationOutcome on_context_notification(Middleware& mw, const std::vector<context::ContextEvent>& events);

/// Applies a verified plan atomically: any failing action rolls the graph
/// and registrations back and throws Error{action_failure}. Throws
/// Error{unverified_plan} for unverified plans.
AdaptationRecord execute_plan(Middleware& mw, const CompositionPlan& plan);

/// Re-evaluates the target's policies, executes a verified plan if any and
/// retries the message exactly once. Throws
/// Error{does_not_recognize_selector} if it still goes unanswered.
Value recover_unrecognized(Middleware& mw, const std::string& target, kernel::Message& msg);

}  // namespace cosm::adaptation
