#include "cosm/context/context.hpp"

#include "cosm/error.hpp"
#include "cosm/kernel/application.hpp"

namespace cosm::context {

std::string_view to_string(ChangePhase p) { return p == ChangePhase::will_change ? "WillChange" : "DidChange"; }

std::string ContextEvent::selector() const { return entity + std::string(to_string(phase)); }

std::uint64_t EventQueue::push(ContextEvent event) {
  std::lock_guard lock(mutex_);
  event.seq = next_seq_++;
  events_.push_back(std::move(event));
  return events_.back().seq;
}

std::optional<ContextEvent> EventQueue::pop() {
  std::lock_guard lock(mutex_);
  if (events_.empty()) return std::nullopt;
  ContextEvent e = std::move(events_.front());
  events_.pop_front();
  return e;
}

std::size_t EventQueue::size() const {
  std::lock_guard lock(mutex_);
  return events_.size();
}

void ContextRepository::add_entity(std::string name, Value initial) {
  std::lock_guard lock(mutex_);
  ContextEntity e{name, std::move(initial), {}};
  entities_.insert_or_assign(std::move(name), std::move(e));
}

bool ContextRepository::has_entity(std::string_view name) const {
  std::lock_guard lock(mutex_);
  return entities_.contains(name);
}

std::vector<std::string> ContextRepository::entity_names() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [n, _] : entities_) out.push_back(n);
  return out;
}

ContextEntity ContextRepository::entity(std::string_view name) const {
  std::lock_guard lock(mutex_);
  auto it = entities_.find(name);
  if (it == entities_.end()) throw Error(ErrorCode::unknown_entity, "no context entity '" + std::string(name) + "'");
  return it->second;
}

void ContextRepository::seed(std::string_view name, Value value) {
  std::lock_guard lock(mutex_);
  auto it = entities_.find(name);
  if (it == entities_.end()) throw Error(ErrorCode::unknown_entity, "no context entity '" + std::string(name) + "'");
  it->second.value = std::move(value);
}

void ContextRepository::register_observer(const std::string& component, const std::string& entity) {
  std::lock_guard lock(mutex_);
  if (!entities_.contains(entity)) throw Error(ErrorCode::unknown_entity, "no context entity '" + entity + "'");
  registrations_.insert({component, entity});
}

void ContextRepository::unregister_observer(const std::string& component, const std::string& entity) {
  std::lock_guard lock(mutex_);
  registrations_.erase({component, entity});
}

void ContextRepository::unregister_component(const std::string& component) {
  std::lock_guard lock(mutex_);
  std::erase_if(registrations_, [&](const auto& r) { return r.first == component; });
}

bool ContextRepository::is_registered(const std::string& component, const std::string& entity) const {
  std::lock_guard lock(mutex_);
  return registrations_.contains({component, entity});
}

std::vector<std::string> ContextRepository::observers_of(std::string_view entity) const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [component, e] : registrations_)
    if (e == entity) out.push_back(component);
  return out;
}

std::set<std::pair<std::string, std::string>> ContextRepository::registrations() const {
  std::lock_guard lock(mutex_);
  return registrations_;
}

Snapshot ContextRepository::snapshot() const {
  std::lock_guard lock(mutex_);
  Snapshot out;
  for (const auto& [n, e] : entities_) out.emplace(n, e.value);
  return out;
}

void register_observer(ContextRepository& repo, const std::string& component, const std::string& entity) {
  repo.register_observer(component, entity);
}

void unregister_observer(ContextRepository& repo, const std::string& component, const std::string& entity) {
  repo.unregister_observer(component, entity);
}

void sense(ContextRepository& repo, EventQueue& queue, std::string_view entity, Value value, std::int64_t at) {
  std::scoped_lock lock(repo.mutex_, queue.mutex_);
  auto it = repo.entities_.find(entity);
  if (it == repo.entities_.end())
    throw Error(ErrorCode::unknown_entity, "no context entity '" + std::string(entity) + "'");
  ContextEntity& e = it->second;
  if (e.value == value) return;

  ContextEvent will{e.name, ChangePhase::will_change, e.value, value, at, queue.next_seq_++};
  queue.events_.push_back(will);

  e.value = value;
  e.history.emplace_back(at, value);
  while (e.history.size() > repo.history_bound_) e.history.pop_front();

  ContextEvent did = std::move(will);
  did.phase = ChangePhase::did_change;
  did.seq = queue.next_seq_++;
  queue.events_.push_back(std::move(did));
}

Snapshot snapshot(const ContextRepository& repo) { return repo.snapshot(); }

DispatchReport dispatch(ContextRepository& repo, EventQueue& queue, kernel::Application& app,
                        std::optional<std::size_t> limit, const AdaptationHook& hook) {
  DispatchReport report;
  while (!limit || report.events < *limit) {
    auto event = queue.pop();
    if (!event) break;
    ++report.events;
    if (hook) hook(*event);
    const std::string selector = event->selector();
    for (const auto& component : repo.observers_of(event->entity)) {
      if (!app.graph.node(component)) continue;
      kernel::Message msg{selector, {event->old_value, event->new_value}, std::nullopt};
      ++report.deliveries;
      bool handled = true;
      try {
        kernel::send_message(app, component, msg);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::does_not_recognize_selector) throw;
        handled = false;
        ++report.unhandled;
      }
      report.trace.push_back({event->seq, component, selector, handled});
    }
    report.processed.push_back(std::move(*event));
  }
  return report;
}

}  // namespace cosm::context
