#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cosm/value.hpp"

namespace cosm::kernel {
struct Application;
}

namespace cosm::context {

inline constexpr std::size_t kDefaultHistoryBound = 64;

enum class ChangePhase { will_change, did_change };

std::string_view to_string(ChangePhase p);

struct ContextEntity {
  std::string name;
  Value value;
  std::deque<std::pair<std::int64_t, Value>> history;
};

struct ContextEvent {
  std::string entity;
  ChangePhase phase = ChangePhase::did_change;
  Value old_value;
  Value new_value;
  std::int64_t timestamp = 0;
  std::uint64_t seq = 0;

  /// `<Entity><Phase>`, e.g. BatteryLevelDidChange.
  std::string selector() const;
};

using Snapshot = std::map<std::string, Value, std::less<>>;

class ContextRepository;

/// Multi-producer FIFO of context events. Sequence numbers are assigned
/// under the queue lock, so they are strictly increasing in enqueue order.
class EventQueue {
 public:
  /// Enqueues a copy of `event` with the next sequence number.
  std::uint64_t push(ContextEvent event);
  std::optional<ContextEvent> pop();
  std::size_t size() const;
  bool empty() const { return size() == 0; }

 private:
  friend void sense(ContextRepository&, EventQueue&, std::string_view, Value, std::int64_t);
  mutable std::mutex mutex_;
  std::deque<ContextEvent> events_;
  std::uint64_t next_seq_ = 1;
};

/// Entities and observer registrations (the context repository).
class ContextRepository {
 public:
  explicit ContextRepository(std::size_t history_bound = kDefaultHistoryBound)
      : history_bound_(history_bound) {}

  void add_entity(std::string name, Value initial);
  bool has_entity(std::string_view name) const;
  std::vector<std::string> entity_names() const;
  /// Throws Error{unknown_entity}.
  ContextEntity entity(std::string_view name) const;
  /// Overwrites the committed value without emitting events.
  void seed(std::string_view name, Value value);

  void register_observer(const std::string& component, const std::string& entity);
  void unregister_observer(const std::string& component, const std::string& entity);
  void unregister_component(const std::string& component);
  bool is_registered(const std::string& component, const std::string& entity) const;
  /// Observers of `entity`, ordered by component id.
  std::vector<std::string> observers_of(std::string_view entity) const;
  std::set<std::pair<std::string, std::string>> registrations() const;

  Snapshot snapshot() const;
  std::size_t history_bound() const { return history_bound_; }

 private:
  friend void sense(ContextRepository&, EventQueue&, std::string_view, Value, std::int64_t);
  mutable std::mutex mutex_;
  std::size_t history_bound_;
  std::map<std::string, ContextEntity, std::less<>> entities_;
  // (component, entity)
  std::set<std::pair<std::string, std::string>> registrations_;
};

void register_observer(ContextRepository& repo, const std::string& component, const std::string& entity);
void unregister_observer(ContextRepository& repo, const std::string& component, const std::string& entity);

/// Enqueues WillChange(old,new), commits the value, enqueues DidChange(old,new).
/// Both events carry `at` and consecutive sequence numbers. Unchanged values
/// emit nothing. Safe to call from any thread. Throws Error{unknown_entity}.
void sense(ContextRepository& repo, EventQueue& queue, std::string_view entity, Value value,
           std::int64_t at);

Snapshot snapshot(const ContextRepository& repo);

struct Delivery {
  std::uint64_t seq = 0;
  std::string component;
  std::string selector;
  bool handled = true;
  friend bool operator==(const Delivery&, const Delivery&) = default;
};

struct DispatchReport {
  std::size_t events = 0;
  std::size_t deliveries = 0;
  std::size_t unhandled = 0;
  std::vector<ContextEvent> processed;
  std::vector<Delivery> trace;
};

using AdaptationHook = std::function<void(const ContextEvent&)>;

/// Drains up to `limit` events in FIFO order. For each event the hook is
/// notified first, then every registered observer present in the graph
/// receives a `<Entity><Phase>` message carrying [old, new]. Unrecognized
/// selectors are counted, not fatal.
DispatchReport dispatch(ContextRepository& repo, EventQueue& queue, kernel::Application& app,
                        std::optional<std::size_t> limit = std::nullopt,
                        const AdaptationHook& hook = {});

}  // namespace cosm::context
