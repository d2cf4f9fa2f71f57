#include "cosm/kernel/application.hpp"

#include <algorithm>
#include <set>

#include "cosm/error.hpp"

namespace cosm::kernel {

Application::Application(adl::ComponentGraph g) : graph(std::move(g)) {
  for (const auto& [id, c] : graph.nodes)
    if (c.kind == ComponentKind::base) base_roster.insert(id);
}

namespace {

Value invoke(Application& app, CocaComponent& c, const Handler& h, const Message& msg) {
  ++app.metrics.invocations;
  app.metrics.handler_units += h.cost_units;
  return h.fn(c.local_state, msg);
}

std::optional<Value> dispatch_in(Application& app, CocaComponent& c, const Message& msg,
                                 std::set<std::string>& visited) {
  visited.insert(c.id);
  const std::string& s = msg.selector;

  // Dispatch-table owner: static part first, then the first declaring layer.
  if (auto it = c.static_handlers.find(s); it != c.static_handlers.end()) return invoke(app, c, it->second, msg);
  for (auto& l : c.layers) {
    if (!l.handles(s)) continue;
    if (l.active) return invoke(app, c, l.handlers.find(s)->second, msg);
    break;
  }

  // Delegate forwarding through the adopted protocol.
  if (c.delegate_target && !visited.contains(*c.delegate_target)) {
    const bool in_protocol = std::any_of(c.protocol.begin(), c.protocol.end(),
                                         [&](const adl::SelectorDecl& d) { return d.name == s; });
    CocaComponent* delegate = app.graph.node(*c.delegate_target);
    if (in_protocol && delegate && conforms_to_protocol(*delegate, c.protocol)) {
      ++app.metrics.forwarded;
      if (auto v = dispatch_in(app, *delegate, msg, visited)) return v;
    }
  }

  // Chain of responsibility over the remaining active layers.
  for (auto& l : c.layers)
    if (l.active && l.handles(s)) return invoke(app, c, l.handlers.find(s)->second, msg);
  return std::nullopt;
}

}  // namespace

std::optional<Value> try_send(Application& app, const std::string& target, Message& msg) {
  CocaComponent* c = app.graph.node(target);
  if (!c) throw Error(ErrorCode::unknown_target, "no component '" + target + "' in the graph");
  std::set<std::string> visited;
  auto v = dispatch_in(app, *c, msg, visited);
  if (!v) return std::nullopt;
  if (app.interceptor) v = app.interceptor(target, msg, std::move(*v));
  msg.return_slot = *v;
  return v;
}

Value send_message(Application& app, const std::string& target, Message& msg) {
  if (auto v = try_send(app, target, msg)) return *v;
  if (app.unrecognized_hook && !app.recovering) {
    app.recovering = true;
    struct Reset {
      bool& flag;
      ~Reset() { flag = false; }
    } reset{app.recovering};
    try {
      return app.unrecognized_hook(app, target, msg);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::does_not_recognize_selector) ++app.metrics.unrecognized;
      throw;
    }
  }
  ++app.metrics.unrecognized;
  throw Error(ErrorCode::does_not_recognize_selector, target + " does not recognize '" + msg.selector + "'");
}

}  // namespace cosm::kernel
