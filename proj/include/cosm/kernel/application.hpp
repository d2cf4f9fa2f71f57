#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>

#include "cosm/adl/graph.hpp"
#include "cosm/kernel/component.hpp"

namespace cosm::kernel {

struct MetricsSink {
  std::uint64_t invocations = 0;
  std::uint64_t handler_units = 0;
  std::uint64_t forwarded = 0;
  std::uint64_t unrecognized = 0;
};

struct Application;

/// Called when no part of the chain responds; may adapt and retry.
using UnrecognizedHook = std::function<Value(Application&, const std::string& target, Message&)>;
/// Sees every return value after invocation and may replace it.
using ReturnInterceptor = std::function<Value(const std::string& target, const Message&, Value)>;

/// The running application: graph, base-component roster and metrics.
/// Owned by the single dispatch context.
struct Application {
  explicit Application(adl::ComponentGraph g);

  adl::ComponentGraph graph;
  std::set<std::string> base_roster;
  MetricsSink metrics;
  UnrecognizedHook unrecognized_hook;
  ReturnInterceptor interceptor;
  bool recovering = false;
};

/// Dispatches `msg` to `target`:
///   1. the dispatch-table owner, when it is the static part or an active layer;
///   2. the delegate, when the selector belongs to the target's protocol and
///      the delegate conforms to it;
///   3. the first active layer, in declaration order, handling the selector;
///   4. the unrecognized hook (once), else Error{does_not_recognize_selector}.
/// The result lands in msg.return_slot. Error{unknown_target} when the
/// target is not in the graph.
Value send_message(Application& app, const std::string& target, Message& msg);

/// Steps 1-3 only; nullopt when nothing responds.
std::optional<Value> try_send(Application& app, const std::string& target, Message& msg);

}  // namespace cosm::kernel
