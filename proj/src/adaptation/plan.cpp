#include "cosm/adaptation/plan.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "cosm/error.hpp"

namespace cosm::adaptation {

std::string StateDigest::fingerprint() const {
  std::string out = "layers=[";
  bool first = true;
  for (const auto& a : active_layers) {
    if (!first) out += ",";
    first = false;
    out += a.component + "." + a.layer;
  }
  out += "] roster=[";
  first = true;
  for (const auto& r : roster) {
    if (!first) out += ",";
    first = false;
    out += r;
  }
  out += "] delegates=[";
  first = true;
  for (const auto& [from, to] : delegates) {
    if (!first) out += ",";
    first = false;
    out += from + "->" + to;
  }
  return out + "]";
}

StateDigest digest_of(const adl::ComponentGraph& graph) {
  StateDigest d;
  d.active_layers = graph.active_layers();
  for (const auto& [id, c] : graph.nodes) {
    d.roster.insert(id);
    if (c.delegate_target) d.delegates[id] = *c.delegate_target;
  }
  return d;
}

namespace {

using LayerKey = std::pair<std::string, std::string>;

struct LayerInfo {
  std::optional<std::string> exclusive;
};

/// Layer layout per component as seen by the plan: graph nodes, overridden
/// by components (re)loaded earlier in the plan, whose layers start inactive.
class LayerView {
 public:
  LayerView(const adl::ComponentGraph& graph, const kernel::FactoryRegistry* factories)
      : graph_(graph), factories_(factories) {}

  void loaded(const std::string& id) {
    fresh_.insert(id);
    if (factories_ && factories_->contains(id)) {
      try {
        loaded_.insert_or_assign(id, kernel::instantiate(*factories_, id));
      } catch (const Error&) {
        loaded_.erase(id);
      }
    } else {
      loaded_.erase(id);
    }
  }

  const kernel::CocaComponent* component(const std::string& id) const {
    if (fresh_.contains(id)) {
      auto it = loaded_.find(id);
      return it == loaded_.end() ? nullptr : &it->second;
    }
    return graph_.node(id);
  }

  bool initially_active(const std::string& component, const std::string& layer) const {
    if (fresh_.contains(component)) return false;
    const auto* c = graph_.node(component);
    const auto* l = c ? c->layer(layer) : nullptr;
    return l && l->active;
  }

 private:
  const adl::ComponentGraph& graph_;
  const kernel::FactoryRegistry* factories_;
  std::set<std::string> fresh_;
  std::map<std::string, kernel::CocaComponent> loaded_;
};

const kernel::Layer& resolve(const LayerView& view, const std::string& component, const std::string& layer) {
  const auto* c = view.component(component);
  if (!c) throw Error(ErrorCode::unresolvable_target, "unknown component '" + component + "'");
  const auto* l = c->layer(layer);
  if (!l) throw Error(ErrorCode::unresolvable_target, "component '" + component + "' has no layer '" + layer + "'");
  return *l;
}

}  // namespace

CompositionPlan build_composition_plan(const adl::ComponentGraph& graph,
                                       const std::vector<std::vector<AdaptationAction>>& results,
                                       const std::vector<std::string>& styles,
                                       const kernel::FactoryRegistry* factories) {
  CompositionPlan plan;
  std::set<std::string> groups;
  for (const auto& s : styles) {
    if (s.starts_with("exclusive:") && s.size() > 10) {
      groups.insert(s.substr(10));
    } else if (std::find(plan.unknown_styles.begin(), plan.unknown_styles.end(), s) == plan.unknown_styles.end()) {
      plan.unknown_styles.push_back(s);
    }
  }

  LayerView view(graph, factories);
  std::vector<AdaptationAction> expanded;
  for (const auto& list : results) {
    for (const auto& action : list) {
      if (const auto* a = std::get_if<ActivateLayer>(&action)) {
        const auto& layer = resolve(view, a->component, a->layer);
        if (layer.exclusive && groups.contains(*layer.exclusive)) {
          for (const auto& sib : view.component(a->component)->layers)
            if (sib.id != layer.id && sib.exclusive == layer.exclusive)
              expanded.push_back(DeactivateLayer{a->component, sib.id});
        }
      } else if (const auto* d = std::get_if<DeactivateLayer>(&action)) {
        resolve(view, d->component, d->layer);
      } else if (const auto* l = std::get_if<LoadComponent>(&action)) {
        view.loaded(l->id);
      } else if (const auto* r = std::get_if<ReplaceComponent>(&action)) {
        view.loaded(r->new_id);
      }
      expanded.push_back(action);
    }
  }

  // Last writer wins per layer and per delegate source.
  std::map<LayerKey, std::size_t> last_toggle;
  std::map<std::string, std::size_t> last_rebind;
  for (std::size_t i = 0; i < expanded.size(); ++i) {
    const auto& action = expanded[i];
    if (const auto* a = std::get_if<ActivateLayer>(&action)) last_toggle[{a->component, a->layer}] = i;
    else if (const auto* d = std::get_if<DeactivateLayer>(&action)) last_toggle[{d->component, d->layer}] = i;
    else if (const auto* r = std::get_if<RebindDelegate>(&action)) last_rebind[r->component] = i;
  }

  LayerView minimize(graph, factories);
  for (std::size_t i = 0; i < expanded.size(); ++i) {
    const auto& action = expanded[i];
    if (const auto* a = std::get_if<ActivateLayer>(&action)) {
      if (last_toggle[{a->component, a->layer}] != i || minimize.initially_active(a->component, a->layer)) continue;
    } else if (const auto* d = std::get_if<DeactivateLayer>(&action)) {
      if (last_toggle[{d->component, d->layer}] != i || !minimize.initially_active(d->component, d->layer)) continue;
    } else if (const auto* r = std::get_if<RebindDelegate>(&action)) {
      if (last_rebind[r->component] != i) continue;
      const auto* c = graph.node(r->component);
      if (c && c->delegate_target == r->target) continue;
    } else if (const auto* l = std::get_if<LoadComponent>(&action)) {
      minimize.loaded(l->id);
    } else if (const auto* rp = std::get_if<ReplaceComponent>(&action)) {
      minimize.loaded(rp->new_id);
    }
    plan.actions.push_back(action);
  }
  return plan;
}

Ledger charges_for(const AdaptationAction& action) {
  Ledger l;
  if (std::holds_alternative<ActivateLayer>(action) || std::holds_alternative<DeactivateLayer>(action))
    l.add(Charge::layer_toggle);
  else if (std::holds_alternative<LoadComponent>(action) || std::holds_alternative<ReplaceComponent>(action))
    l.add(Charge::component_load);
  else if (std::holds_alternative<RebindDelegate>(action))
    l.add(Charge::delegate_rebind);
  return l;
}

}  // namespace cosm::adaptation
