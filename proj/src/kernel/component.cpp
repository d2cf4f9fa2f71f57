#include "cosm/kernel/component.hpp"

#include <algorithm>
#include <set>

#include "cosm/error.hpp"

namespace cosm::kernel {

Layer* CocaComponent::layer(std::string_view layer_id) {
  for (auto& l : layers)
    if (l.id == layer_id) return &l;
  return nullptr;
}

const Layer* CocaComponent::layer(std::string_view layer_id) const {
  for (const auto& l : layers)
    if (l.id == layer_id) return &l;
  return nullptr;
}

DispatchTable CocaComponent::dispatch_table() const {
  DispatchTable table;
  for (const auto& [s, _] : static_handlers) table.emplace(s, HandlerRef::static_part());
  for (const auto& l : layers)
    for (const auto& [s, _] : l.handlers) table.emplace(s, HandlerRef::in_layer(l.id));
  return table;
}

bool responds_to_selector(const CocaComponent& c, std::string_view selector, bool active_only) {
  if (c.static_handlers.contains(selector)) return true;
  return std::any_of(c.layers.begin(), c.layers.end(), [&](const Layer& l) {
    return (!active_only || l.active) && l.handles(selector);
  });
}

bool conforms_to_protocol(const CocaComponent& c, std::span<const adl::SelectorDecl> protocol) {
  return std::all_of(protocol.begin(), protocol.end(), [&](const adl::SelectorDecl& s) {
    return !s.required || responds_to_selector(c, s.name, false);
  });
}

HandlerRef method_for_selector(const CocaComponent& c, std::string_view selector) {
  if (c.static_handlers.contains(selector)) return HandlerRef::static_part();
  for (const auto& l : c.layers)
    if (l.handles(selector)) return HandlerRef::in_layer(l.id);
  throw Error(ErrorCode::no_such_method, c.id + " has no method for '" + std::string(selector) + "'");
}

bool is_kind_of(const CocaComponent& c, Kind kind) {
  switch (kind) {
    case Kind::component: return true;
    case Kind::base: return c.kind == ComponentKind::base;
    case Kind::context_oriented: return c.kind == ComponentKind::context_oriented;
  }
  return false;
}

namespace {

template <class Map>
std::vector<std::string> keys_of(const Map& m) {
  std::vector<std::string> out;
  for (const auto& [k, _] : m) out.push_back(k);
  return out;
}

}  // namespace

bool structurally_equal(const CocaComponent& a, const CocaComponent& b) {
  if (a.id != b.id || a.kind != b.kind || a.delegate_target != b.delegate_target || a.protocol != b.protocol ||
      a.observes != b.observes || keys_of(a.static_handlers) != keys_of(b.static_handlers) ||
      a.layers.size() != b.layers.size())
    return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    const auto& la = a.layers[i];
    const auto& lb = b.layers[i];
    if (la.id != lb.id || la.policy_id != lb.policy_id || la.exclusive != lb.exclusive || la.active != lb.active ||
        keys_of(la.handlers) != keys_of(lb.handlers))
      return false;
  }
  return true;
}

bool matches_declaration(const CocaComponent& c, const adl::ComponentDecl& decl) {
  auto sorted = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  if (c.id != decl.id || c.kind != decl.kind || c.protocol != decl.protocol || c.observes != decl.observes ||
      keys_of(c.static_handlers) != sorted(decl.static_selectors) || c.layers.size() != decl.layers.size())
    return false;
  for (std::size_t i = 0; i < c.layers.size(); ++i) {
    const auto& l = c.layers[i];
    const auto& d = decl.layers[i];
    if (l.id != d.id || l.policy_id != d.policy || l.exclusive != d.exclusive ||
        keys_of(l.handlers) != sorted(d.handles))
      return false;
  }
  return true;
}

CocaComponent make_declared_component(const adl::ComponentDecl& decl) {
  auto echo = [](std::string tag) {
    return Handler{[tag = std::move(tag)](LocalState&, const Message&) -> Value { return tag; }, 1};
  };
  CocaComponent c;
  c.id = decl.id;
  c.kind = decl.kind;
  c.protocol = decl.protocol;
  c.observes = decl.observes;
  for (const auto& s : decl.static_selectors) c.static_handlers.emplace(s, echo(decl.id + ".static." + s));
  for (const auto& ld : decl.layers) {
    Layer l;
    l.id = ld.id;
    l.policy_id = ld.policy;
    l.exclusive = ld.exclusive;
    for (const auto& s : ld.handles) l.handlers.emplace(s, echo(decl.id + "." + ld.id + "." + s));
    c.layers.push_back(std::move(l));
  }
  return c;
}

void FactoryRegistry::register_factory(std::string id, Factory factory) {
  factories_.insert_or_assign(std::move(id), std::move(factory));
}

bool FactoryRegistry::contains(std::string_view id) const { return factories_.contains(id); }

std::vector<std::string> FactoryRegistry::ids() const { return keys_of(factories_); }

void FactoryRegistry::register_declared(const adl::Document& doc) {
  for (const auto& decl : doc.components)
    if (!contains(decl.id)) register_factory(decl.id, [decl] { return make_declared_component(decl); });
}

CocaComponent instantiate(const FactoryRegistry& registry, std::string_view id) {
  auto it = registry.factories_.find(id);
  if (it == registry.factories_.end())
    throw Error(ErrorCode::component_not_found, "no factory for component '" + std::string(id) + "'");
  CocaComponent c = it->second();
  if (c.id != id)
    throw Error(ErrorCode::factory_mismatch, "factory for '" + std::string(id) + "' produced '" + c.id + "'");
  return c;
}

}  // namespace cosm::kernel
