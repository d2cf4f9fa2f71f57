#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cosm/policy/policy.hpp"
#include "cosm/value.hpp"

namespace cosm::adl {

enum class ComponentKind { base, context_oriented };
enum class ConnectorType { delegate, message, adaptor };

std::string_view to_string(ComponentKind k);
std::string_view to_string(ConnectorType t);

/// `[A-Za-z][A-Za-z0-9]*`; also the grammar for context entity names.
bool is_valid_selector(std::string_view name);
/// `[A-Za-z][A-Za-z0-9_]*`; component, layer, policy and connector ids.
bool is_valid_identifier(std::string_view name);

struct SelectorDecl {
  std::string name;
  bool required = true;
  friend bool operator==(const SelectorDecl&, const SelectorDecl&) = default;
};

struct LayerDecl {
  std::string id;
  std::string policy;
  std::optional<std::string> exclusive;
  std::vector<std::string> handles;
  friend bool operator==(const LayerDecl&, const LayerDecl&) = default;
};

struct ComponentDecl {
  std::string id;
  ComponentKind kind = ComponentKind::base;
  std::vector<SelectorDecl> protocol;
  std::vector<LayerDecl> layers;
  std::vector<std::string> observes;
  std::vector<std::string> static_selectors;

  const LayerDecl* layer(std::string_view layer_id) const;
  friend bool operator==(const ComponentDecl&, const ComponentDecl&) = default;
};

struct ConnectorDecl {
  std::string id;
  std::string from;
  std::string to;
  ConnectorType type = ConnectorType::message;
  friend bool operator==(const ConnectorDecl&, const ConnectorDecl&) = default;
};

struct Activation {
  std::string component;
  std::string layer;
  friend bool operator==(const Activation&, const Activation&) = default;
  friend auto operator<=>(const Activation&, const Activation&) = default;
};

struct Property {
  std::string name;
  Value value;
  friend bool operator==(const Property&, const Property&) = default;
};

struct ConfigDecl {
  std::vector<Activation> initial_activations;
  std::vector<Property> properties;

  const Value* property(std::string_view name) const;
  void set_property(std::string name, Value value);
  friend bool operator==(const ConfigDecl&, const ConfigDecl&) = default;
};

struct Document {
  int version = 1;
  std::vector<ComponentDecl> components;
  std::vector<ConnectorDecl> connectors;
  ConfigDecl configuration;
  std::vector<policy::DecisionPolicy> policies;

  const ComponentDecl* component(std::string_view id) const;
  const policy::DecisionPolicy* policy(std::string_view id) const;
  friend bool operator==(const Document&, const Document&) = default;
};

/// Checks every document invariant and throws the first violation as
/// Error{schema_violation | dangling_reference | duplicate_id}.
void validate(const Document& doc);

/// Every identifier referenced but not declared, in scan order. Empty for
/// any document accepted by validate().
std::vector<std::string> dangling_references(const Document& doc);

/// Parses COCA-ADL XML. Throws Error{malformed_xml} on syntax errors,
/// Error{schema_violation} on unknown elements/attributes, and the
/// validate() errors for cross-reference problems.
Document parse_adl(std::string_view xml);

/// Canonical XML rendering; parse_adl(serialize_adl(d)) == d.
std::string serialize_adl(const Document& doc);

Document load_adl(const std::string& path);

}  // namespace cosm::adl
