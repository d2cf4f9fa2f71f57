#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cosm/adl/document.hpp"
#include "cosm/value.hpp"

namespace cosm::kernel {

using adl::ComponentKind;

/// Kinds of the component inheritance tree; `component` is the root.
enum class Kind { component, base, context_oriented };

using LocalState = std::map<std::string, Value, std::less<>>;

struct Message {
  std::string selector;
  std::vector<Value> arguments;
  std::optional<Value> return_slot;
};

using HandlerFn = std::function<Value(LocalState&, const Message&)>;

struct Handler {
  HandlerFn fn;
  std::uint32_t cost_units = 1;
};

struct Layer {
  std::string id;
  std::string policy_id;
  std::optional<std::string> exclusive;
  std::map<std::string, Handler, std::less<>> handlers;
  bool active = false;

  bool handles(std::string_view selector) const { return handlers.contains(selector); }
};

/// Which part of a component owns a handler.
struct HandlerRef {
  enum class Part { static_part, layer };
  Part part = Part::static_part;
  std::string layer;

  static HandlerRef static_part() { return {}; }
  static HandlerRef in_layer(std::string id) { return {Part::layer, std::move(id)}; }
  friend bool operator==(const HandlerRef&, const HandlerRef&) = default;
};

using DispatchTable = std::map<std::string, HandlerRef, std::less<>>;

/// Runtime instance of a context-oriented (or base) component: a static
/// part, ordered layers, at most one delegate and the protocol it adopts.
struct CocaComponent {
  std::string id;
  ComponentKind kind = ComponentKind::base;
  std::map<std::string, Handler, std::less<>> static_handlers;
  std::vector<Layer> layers;
  std::optional<std::string> delegate_target;
  std::vector<adl::SelectorDecl> protocol;
  std::vector<std::string> observes;
  LocalState local_state;

  Layer* layer(std::string_view layer_id);
  const Layer* layer(std::string_view layer_id) const;

  /// Static selectors first, then each layer's selectors in declaration
  /// order; the first owner wins.
  DispatchTable dispatch_table() const;
};

bool responds_to_selector(const CocaComponent& c, std::string_view selector, bool active_only);

/// Structural: every required selector is handled somewhere, active or not.
bool conforms_to_protocol(const CocaComponent& c, std::span<const adl::SelectorDecl> protocol);

/// Throws Error{no_such_method}.
HandlerRef method_for_selector(const CocaComponent& c, std::string_view selector);

bool is_kind_of(const CocaComponent& c, Kind kind);

/// Same shape: id, kind, selectors per part, layer ids/order/activation,
/// delegate, protocol and observes. Local state and handler bodies ignored.
bool structurally_equal(const CocaComponent& a, const CocaComponent& b);

/// True when the instance has exactly the declared structure.
bool matches_declaration(const CocaComponent& c, const adl::ComponentDecl& decl);

/// Instance built purely from a declaration. Each handler returns the
/// string "<component>.<part>.<selector>", where part is `static` or a layer id.
CocaComponent make_declared_component(const adl::ComponentDecl& decl);

using Factory = std::function<CocaComponent()>;

/// Component repository: id -> factory (the bundle-loading stand-in).
class FactoryRegistry {
 public:
  void register_factory(std::string id, Factory factory);
  bool contains(std::string_view id) const;
  std::vector<std::string> ids() const;

  /// Registers a declarative factory for every declared component that has
  /// none yet.
  void register_declared(const adl::Document& doc);

 private:
  friend CocaComponent instantiate(const FactoryRegistry& registry, std::string_view id);
  std::map<std::string, Factory, std::less<>> factories_;
};

/// Fresh instance. Throws Error{component_not_found}, or
/// Error{factory_mismatch} if the factory produced a different id.
CocaComponent instantiate(const FactoryRegistry& registry, std::string_view id);

}  // namespace cosm::kernel
