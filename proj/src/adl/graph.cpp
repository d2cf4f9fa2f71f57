#include "cosm/adl/graph.hpp"

#include <algorithm>

#include "cosm/error.hpp"
#include "cosm/policy/repository.hpp"

namespace cosm::adl {

kernel::CocaComponent* ComponentGraph::node(std::string_view id) {
  auto it = nodes.find(id);
  return it == nodes.end() ? nullptr : &it->second;
}

const kernel::CocaComponent* ComponentGraph::node(std::string_view id) const {
  auto it = nodes.find(id);
  return it == nodes.end() ? nullptr : &it->second;
}

std::set<Activation> ComponentGraph::active_layers() const {
  std::set<Activation> out;
  for (const auto& [id, c] : nodes)
    for (const auto& l : c.layers)
      if (l.active) out.insert({id, l.id});
  return out;
}

std::size_t ComponentGraph::delegate_edge_count() const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [](const ConnectorDecl& e) { return e.type == ConnectorType::delegate; }));
}

void refresh_inheritance(ComponentGraph& graph) {
  graph.inheritance.clear();
  graph.inheritance["component"] = {"base", "context-oriented"};
  auto& base = graph.inheritance["base"];
  auto& co = graph.inheritance["context-oriented"];
  for (const auto& [id, c] : graph.nodes) (c.kind == ComponentKind::base ? base : co).push_back(id);
  graph.attachments.clear();
  for (const auto& [id, c] : graph.nodes) {
    std::vector<std::string> attached;
    for (const auto& l : c.layers)
      if (std::find(attached.begin(), attached.end(), l.policy_id) == attached.end()) attached.push_back(l.policy_id);
    if (!attached.empty()) graph.attachments[id] = std::move(attached);
  }
}

ComponentGraph build_graph(const Document& doc, const kernel::FactoryRegistry& factories,
                           policy::PolicyRepository* policies) {
  ComponentGraph graph;
  for (const auto& decl : doc.components) {
    kernel::CocaComponent c;
    if (factories.contains(decl.id)) {
      c = kernel::instantiate(factories, decl.id);
      if (!kernel::matches_declaration(c, decl))
        throw Error(ErrorCode::factory_mismatch, "instance of '" + decl.id + "' does not match its declaration");
    } else if (decl.kind == ComponentKind::base) {
      c = kernel::make_declared_component(decl);
    } else {
      throw Error(ErrorCode::missing_factory, "no factory for context-oriented component '" + decl.id + "'");
    }
    for (auto& l : c.layers) l.active = false;
    c.delegate_target.reset();
    graph.nodes.emplace(decl.id, std::move(c));
  }
  graph.edges = doc.connectors;
  for (const auto& e : doc.connectors)
    if (e.type == ConnectorType::delegate) graph.nodes.at(e.from).delegate_target = e.to;
  graph.config = doc.configuration;
  for (const auto& a : doc.configuration.initial_activations) graph.nodes.at(a.component).layer(a.layer)->active = true;
  refresh_inheritance(graph);
  if (policies)
    for (const auto& p : doc.policies) policies->add_policy(p);
  return graph;
}

}  // namespace cosm::adl
