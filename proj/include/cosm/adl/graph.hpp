#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cosm/adl/document.hpp"
#include "cosm/kernel/component.hpp"

namespace cosm::policy {
class PolicyRepository;
}

namespace cosm::adl {

/// Runtime architecture model built from a document.
struct ComponentGraph {
  std::map<std::string, kernel::CocaComponent, std::less<>> nodes;
  std::vector<ConnectorDecl> edges;
  ConfigDecl config;
  /// kind name -> children: "component" -> {"base", "context-oriented"},
  /// "base"/"context-oriented" -> component ids.
  std::map<std::string, std::vector<std::string>, std::less<>> inheritance;
  /// component id -> attached policy ids, in layer order, without repeats.
  std::map<std::string, std::vector<std::string>, std::less<>> attachments;

  kernel::CocaComponent* node(std::string_view id);
  const kernel::CocaComponent* node(std::string_view id) const;
  std::set<Activation> active_layers() const;
  std::size_t delegate_edge_count() const;
};

/// Instantiates every declared component, wires delegate connectors,
/// applies initial activations and attaches layer policies. Policies are
/// added to `policies` when given. Throws Error{missing_factory} for a
/// context-oriented component without a factory and Error{factory_mismatch}
/// when an instance disagrees with its declaration.
ComponentGraph build_graph(const Document& doc, const kernel::FactoryRegistry& factories,
                           policy::PolicyRepository* policies = nullptr);

void refresh_inheritance(ComponentGraph& graph);

}  // namespace cosm::adl
