#include "cosm/adl/document.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cosm/error.hpp"

namespace cosm::adl {

std::string_view to_string(ComponentKind k) {
  return k == ComponentKind::base ? "base" : "context-oriented";
}

std::string_view to_string(ConnectorType t) {
  switch (t) {
    case ConnectorType::delegate: return "delegate";
    case ConnectorType::message: return "message";
    case ConnectorType::adaptor: return "adaptor";
  }
  return "?";
}

bool is_valid_selector(std::string_view name) {
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name.front()))) return false;
  return std::all_of(name.begin(), name.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; });
}

bool is_valid_identifier(std::string_view name) {
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name.front()))) return false;
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; });
}

const LayerDecl* ComponentDecl::layer(std::string_view layer_id) const {
  for (const auto& l : layers)
    if (l.id == layer_id) return &l;
  return nullptr;
}

const Value* ConfigDecl::property(std::string_view name) const {
  for (const auto& p : properties)
    if (p.name == name) return &p.value;
  return nullptr;
}

void ConfigDecl::set_property(std::string name, Value value) {
  for (auto& p : properties) {
    if (p.name == name) {
      p.value = std::move(value);
      return;
    }
  }
  properties.push_back({std::move(name), std::move(value)});
}

const ComponentDecl* Document::component(std::string_view id) const {
  for (const auto& c : components)
    if (c.id == id) return &c;
  return nullptr;
}

const policy::DecisionPolicy* Document::policy(std::string_view id) const {
  for (const auto& p : policies)
    if (p.id == id) return &p;
  return nullptr;
}

namespace {

[[noreturn]] void violation(ErrorCode code, const std::string& what) { throw Error(code, what); }

void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) violation(code, what);
}

void unique_names(const std::vector<std::string>& names, const std::string& what) {
  std::set<std::string> seen;
  for (const auto& n : names) require(seen.insert(n).second, ErrorCode::schema_violation, what + " repeats '" + n + "'");
}

void check_chain_targets(const Document& doc, const policy::ActionList& actions, const std::string& where) {
  for (const auto& a : actions)
    if (const auto* ev = std::get_if<policy::EvaluatePolicy>(&a))
      require(doc.policy(ev->id) != nullptr, ErrorCode::dangling_reference,
              where + " chains to undeclared policy '" + ev->id + "'");
}

}  // namespace

void validate(const Document& doc) {
  require(doc.version == 1, ErrorCode::schema_violation, "unsupported version " + std::to_string(doc.version));

  std::set<std::string> policy_ids;
  for (const auto& p : doc.policies) {
    require(is_valid_identifier(p.id), ErrorCode::schema_violation, "bad policy id '" + p.id + "'");
    require(policy_ids.insert(p.id).second, ErrorCode::duplicate_id, "policy '" + p.id + "'");
  }

  std::set<std::string> component_ids;
  for (const auto& c : doc.components) {
    require(is_valid_identifier(c.id), ErrorCode::schema_violation, "bad component id '" + c.id + "'");
    require(component_ids.insert(c.id).second, ErrorCode::duplicate_id, "component '" + c.id + "'");
    if (c.kind == ComponentKind::base) {
      require(c.layers.empty(), ErrorCode::schema_violation, "base component '" + c.id + "' declares layers");
      require(c.observes.empty(), ErrorCode::schema_violation, "base component '" + c.id + "' observes entities");
    }
    std::vector<std::string> protocol_names;
    for (const auto& s : c.protocol) {
      require(is_valid_selector(s.name), ErrorCode::schema_violation, "bad selector '" + s.name + "' in " + c.id);
      protocol_names.push_back(s.name);
    }
    unique_names(protocol_names, "protocol of " + c.id);
    for (const auto& s : c.static_selectors)
      require(is_valid_selector(s), ErrorCode::schema_violation, "bad selector '" + s + "' in " + c.id);
    unique_names(c.static_selectors, "static part of " + c.id);
    for (const auto& e : c.observes)
      require(is_valid_selector(e), ErrorCode::schema_violation, "bad observed entity '" + e + "' in " + c.id);
    unique_names(c.observes, "observes of " + c.id);

    std::set<std::string> layer_ids;
    for (const auto& l : c.layers) {
      require(is_valid_identifier(l.id), ErrorCode::schema_violation, "bad layer id '" + l.id + "' in " + c.id);
      require(layer_ids.insert(l.id).second, ErrorCode::duplicate_id, "layer '" + c.id + "." + l.id + "'");
      require(is_valid_identifier(l.policy), ErrorCode::schema_violation, "layer '" + c.id + "." + l.id + "' has no policy");
      require(policy_ids.contains(l.policy), ErrorCode::dangling_reference,
              "layer '" + c.id + "." + l.id + "' references undeclared policy '" + l.policy + "'");
      if (l.exclusive)
        require(is_valid_identifier(*l.exclusive), ErrorCode::schema_violation, "bad exclusive group in " + l.id);
      for (const auto& s : l.handles)
        require(is_valid_selector(s), ErrorCode::schema_violation, "bad selector '" + s + "' in layer " + l.id);
      unique_names(l.handles, "layer " + c.id + "." + l.id);
    }
  }

  std::set<std::string> connector_ids;
  std::set<std::string> delegating;
  for (const auto& k : doc.connectors) {
    require(is_valid_identifier(k.id), ErrorCode::schema_violation, "bad connector id '" + k.id + "'");
    require(connector_ids.insert(k.id).second, ErrorCode::duplicate_id, "connector '" + k.id + "'");
    require(component_ids.contains(k.from), ErrorCode::dangling_reference,
            "connector '" + k.id + "' from undeclared '" + k.from + "'");
    require(component_ids.contains(k.to), ErrorCode::dangling_reference,
            "connector '" + k.id + "' to undeclared '" + k.to + "'");
    if (k.type == ConnectorType::delegate) {
      require(k.from != k.to, ErrorCode::schema_violation, "delegate connector '" + k.id + "' loops on itself");
      require(delegating.insert(k.from).second, ErrorCode::schema_violation,
              "component '" + k.from + "' has more than one delegate");
    }
  }

  std::set<Activation> activations;
  std::set<std::pair<std::string, std::string>> groups;
  for (const auto& a : doc.configuration.initial_activations) {
    const auto* c = doc.component(a.component);
    require(c != nullptr, ErrorCode::dangling_reference, "activation of undeclared component '" + a.component + "'");
    const auto* l = c->layer(a.layer);
    require(l != nullptr, ErrorCode::dangling_reference,
            "activation of undeclared layer '" + a.component + "." + a.layer + "'");
    require(activations.insert(a).second, ErrorCode::duplicate_id, "activation '" + a.component + "." + a.layer + "'");
    if (l->exclusive)
      require(groups.insert({a.component, *l->exclusive}).second, ErrorCode::schema_violation,
              "two initial activations in exclusive group '" + *l->exclusive + "' of " + a.component);
  }
  std::vector<std::string> property_names;
  for (const auto& p : doc.configuration.properties) {
    require(is_valid_identifier(p.name), ErrorCode::schema_violation, "bad property name '" + p.name + "'");
    property_names.push_back(p.name);
  }
  {
    std::set<std::string> seen;
    for (const auto& n : property_names) require(seen.insert(n).second, ErrorCode::duplicate_id, "property '" + n + "'");
  }

  for (const auto& p : doc.policies) {
    for (std::size_t i = 0; i < p.rules.size(); ++i) {
      const std::string where = "policy '" + p.id + "' rule " + std::to_string(i);
      for (const auto& v : policy::variables_of(p.rules[i].condition))
        require(p.internal(v) || p.external(v), ErrorCode::dangling_reference,
                where + " uses undeclared variable '" + v + "'");
      check_chain_targets(doc, p.rules[i].action, where);
      check_chain_targets(doc, p.rules[i].else_action, where);
    }
    const auto problems = policy::validate(p);
    require(problems.empty(), ErrorCode::schema_violation,
            "policy '" + p.id + "': " + (problems.empty() ? "" : problems.front()));
  }
}

std::vector<std::string> dangling_references(const Document& doc) {
  std::vector<std::string> out;
  for (const auto& c : doc.components)
    for (const auto& l : c.layers)
      if (!doc.policy(l.policy)) out.push_back(l.policy);
  for (const auto& k : doc.connectors) {
    if (!doc.component(k.from)) out.push_back(k.from);
    if (!doc.component(k.to)) out.push_back(k.to);
  }
  for (const auto& a : doc.configuration.initial_activations) {
    const auto* c = doc.component(a.component);
    if (!c)
      out.push_back(a.component);
    else if (!c->layer(a.layer))
      out.push_back(a.component + "." + a.layer);
  }
  for (const auto& p : doc.policies) {
    for (const auto& r : p.rules) {
      for (const auto& v : policy::variables_of(r.condition))
        if (!p.internal(v) && !p.external(v)) out.push_back(p.id + "." + v);
      for (const auto* list : {&r.action, &r.else_action})
        for (const auto& a : *list)
          if (const auto* ev = std::get_if<policy::EvaluatePolicy>(&a); ev && !doc.policy(ev->id))
            out.push_back(ev->id);
    }
  }
  return out;
}

Document load_adl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open ADL file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_adl(ss.str());
}

}  // namespace cosm::adl
