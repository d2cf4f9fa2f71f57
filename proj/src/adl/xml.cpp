#include <expat.h>

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "cosm/adl/document.hpp"
#include "cosm/error.hpp"

namespace cosm::adl {

namespace {

struct XmlNode {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<XmlNode> children;
  std::string text;
  long line = 0;
};

struct TreeBuilder {
  XML_Parser parser = nullptr;
  XmlNode root;
  std::vector<XmlNode*> stack;
  bool has_root = false;
};

void XMLCALL on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
  auto* b = static_cast<TreeBuilder*>(data);
  XmlNode node;
  node.name = name;
  node.line = static_cast<long>(XML_GetCurrentLineNumber(b->parser));
  for (int i = 0; attrs[i]; i += 2) node.attrs.emplace_back(attrs[i], attrs[i + 1]);
  if (b->stack.empty()) {
    b->root = std::move(node);
    b->has_root = true;
    b->stack.push_back(&b->root);
  } else {
    auto& kids = b->stack.back()->children;
    kids.push_back(std::move(node));
    b->stack.push_back(&kids.back());
  }
}

void XMLCALL on_end(void* data, const XML_Char*) { static_cast<TreeBuilder*>(data)->stack.pop_back(); }

void XMLCALL on_text(void* data, const XML_Char* s, int len) {
  auto* b = static_cast<TreeBuilder*>(data);
  if (!b->stack.empty()) b->stack.back()->text.append(s, static_cast<std::size_t>(len));
}

XmlNode parse_tree(std::string_view xml) {
  TreeBuilder b;
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"),
                                                                                        &XML_ParserFree);
  b.parser = parser.get();
  XML_SetUserData(b.parser, &b);
  XML_SetElementHandler(b.parser, on_start, on_end);
  XML_SetCharacterDataHandler(b.parser, on_text);
  if (XML_Parse(b.parser, xml.data(), static_cast<int>(xml.size()), XML_TRUE) == XML_STATUS_ERROR) {
    throw Error(ErrorCode::malformed_xml, std::string(XML_ErrorString(XML_GetErrorCode(b.parser))) + " at line " +
                                              std::to_string(XML_GetCurrentLineNumber(b.parser)));
  }
  if (!b.has_root) throw Error(ErrorCode::malformed_xml, "no root element");
  return std::move(b.root);
}

bool is_blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

/// Attribute access with strict schema checking.
class Element {
 public:
  Element(const XmlNode& node, std::initializer_list<std::string_view> allowed) : node_(node) {
    for (const auto& [k, _] : node.attrs) {
      bool ok = false;
      for (auto a : allowed) ok = ok || a == k;
      if (!ok) fail("unknown attribute '" + k + "'");
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::schema_violation, "<" + node_.name + "> line " + std::to_string(node_.line) + ": " + what);
  }

  std::optional<std::string> optional(std::string_view key) const {
    for (const auto& [k, v] : node_.attrs)
      if (k == key) return v;
    return std::nullopt;
  }

  std::string required(std::string_view key) const {
    if (auto v = optional(key)) return *v;
    fail("missing attribute '" + std::string(key) + "'");
  }

  const XmlNode& node() const { return node_; }

  void no_text() const {
    if (!is_blank(node_.text)) fail("unexpected text content");
  }

  void leaf() const {
    no_text();
    if (!node_.children.empty()) fail("unexpected child <" + node_.children.front().name + ">");
  }

 private:
  const XmlNode& node_;
};

[[noreturn]] void unknown_child(const XmlNode& parent, const XmlNode& child) {
  throw Error(ErrorCode::schema_violation, "<" + parent.name + "> line " + std::to_string(child.line) +
                                               ": unknown element <" + child.name + ">");
}

bool parse_bool_attr(const Element& e, std::string_view key, bool fallback) {
  auto v = e.optional(key);
  if (!v) return fallback;
  if (*v == "true") return true;
  if (*v == "false") return false;
  e.fail("attribute '" + std::string(key) + "' must be true or false");
}

adaptation::AdaptationAction parse_adaptation(const XmlNode& n) {
  using namespace adaptation;
  if (n.name == "activate" || n.name == "deactivate") {
    Element e(n, {"component", "layer"});
    e.leaf();
    if (n.name == "activate") return ActivateLayer{e.required("component"), e.required("layer")};
    return DeactivateLayer{e.required("component"), e.required("layer")};
  }
  if (n.name == "load") {
    Element e(n, {"component"});
    e.leaf();
    return LoadComponent{e.required("component")};
  }
  if (n.name == "replace") {
    Element e(n, {"old", "new"});
    e.leaf();
    return ReplaceComponent{e.required("old"), e.required("new")};
  }
  if (n.name == "rebind") {
    Element e(n, {"component", "target"});
    e.leaf();
    return RebindDelegate{e.required("component"), e.required("target")};
  }
  Element e(n, {"component", "selector"});
  e.no_text();
  InvokeSelector inv{e.required("component"), e.required("selector"), {}};
  for (const auto& a : n.children) {
    if (a.name != "arg") unknown_child(n, a);
    Element arg(a, {"value"});
    arg.leaf();
    inv.args.push_back(parse_literal(arg.required("value")));
  }
  return inv;
}

policy::ActionList parse_actions(const XmlNode& n, const policy::DecisionPolicy& p) {
  Element(n, {}).no_text();
  policy::ActionList out;
  static const std::set<std::string> adaptation_tags{"activate", "deactivate", "load", "replace", "rebind", "invoke"};
  for (const auto& c : n.children) {
    if (adaptation_tags.contains(c.name)) {
      out.emplace_back(parse_adaptation(c));
    } else if (c.name == "set-internal") {
      Element e(c, {"name", "value"});
      e.leaf();
      auto name = e.required("name");
      auto raw = e.required("value");
      const auto* iv = p.internal(name);
      if (!iv) throw Error(ErrorCode::dangling_reference, "set-internal on undeclared internal '" + name + "'");
      auto v = parse_typed_literal(raw, iv->type);
      if (!v) e.fail("value '" + raw + "' is not a " + std::string(to_string(iv->type)));
      out.emplace_back(policy::SetInternal{std::move(name), std::move(*v)});
    } else if (c.name == "evaluate-policy") {
      Element e(c, {"id"});
      e.leaf();
      out.emplace_back(policy::EvaluatePolicy{e.required("id")});
    } else {
      unknown_child(n, c);
    }
  }
  return out;
}

policy::DecisionPolicy parse_policy(const XmlNode& n) {
  Element e(n, {"id", "suit", "style"});
  e.no_text();
  policy::DecisionPolicy p;
  p.id = e.required("id");
  p.suit = e.optional("suit").value_or("");
  p.structure_style = e.optional("style");
  for (const auto& c : n.children) {
    if (c.name == "internal") {
      Element v(c, {"name", "type", "initial"});
      v.leaf();
      auto type = parse_value_type(v.required("type"));
      if (!type) v.fail("unknown type");
      auto raw = v.required("initial");
      auto init = parse_typed_literal(raw, *type);
      if (!init) v.fail("initial value '" + raw + "' does not match its type");
      p.internals.push_back({v.required("name"), *type, *init});
    } else if (c.name == "external") {
      Element v(c, {"name", "entity"});
      v.leaf();
      p.externals.push_back({v.required("name"), v.required("entity")});
    } else if (c.name == "rule") {
      Element r(c, {"trigger"});
      r.no_text();
      policy::Rule rule;
      rule.trigger = r.optional("trigger");
      bool has_condition = false;
      for (const auto& rc : c.children) {
        if (rc.name == "condition") {
          Element ce(rc, {});
          if (!rc.children.empty()) ce.fail("condition must be text");
          try {
            rule.condition = policy::parse_expr(rc.text);
          } catch (const Error& err) {
            ce.fail(err.what());
          }
          has_condition = true;
        } else if (rc.name == "action") {
          rule.action = parse_actions(rc, p);
        } else if (rc.name == "else") {
          rule.else_action = parse_actions(rc, p);
        } else {
          unknown_child(c, rc);
        }
      }
      if (!has_condition) r.fail("rule without <condition>");
      p.rules.push_back(std::move(rule));
    } else if (c.name == "goal") {
      Element g(c, {"property", "op", "value"});
      g.leaf();
      auto op = policy::parse_compare_op(g.required("op"));
      if (!op) g.fail("unknown comparator");
      p.goals.push_back({g.required("property"), *op, parse_literal(g.required("value"))});
    } else {
      unknown_child(n, c);
    }
  }
  return p;
}

ComponentDecl parse_component(const XmlNode& n) {
  Element e(n, {"id", "kind"});
  e.no_text();
  ComponentDecl c;
  c.id = e.required("id");
  const auto kind = e.required("kind");
  if (kind == "base")
    c.kind = ComponentKind::base;
  else if (kind == "context-oriented")
    c.kind = ComponentKind::context_oriented;
  else
    e.fail("unknown kind '" + kind + "'");
  for (const auto& child : n.children) {
    if (child.name == "protocol" || child.name == "static") {
      Element part(child, {});
      part.no_text();
      const bool is_protocol = child.name == "protocol";
      for (const auto& s : child.children) {
        if (s.name != "selector") unknown_child(child, s);
        Element se(s, is_protocol ? std::initializer_list<std::string_view>{"name", "required"}
                                  : std::initializer_list<std::string_view>{"name"});
        se.leaf();
        if (is_protocol)
          c.protocol.push_back({se.required("name"), parse_bool_attr(se, "required", true)});
        else
          c.static_selectors.push_back(se.required("name"));
      }
    } else if (child.name == "layer") {
      Element le(child, {"id", "policy", "exclusive"});
      le.no_text();
      LayerDecl l{le.required("id"), le.required("policy"), le.optional("exclusive"), {}};
      for (const auto& h : child.children) {
        if (h.name != "handles") unknown_child(child, h);
        Element he(h, {"selector"});
        he.leaf();
        l.handles.push_back(he.required("selector"));
      }
      c.layers.push_back(std::move(l));
    } else if (child.name == "observes") {
      Element oe(child, {"entity"});
      oe.leaf();
      c.observes.push_back(oe.required("entity"));
    } else {
      unknown_child(n, child);
    }
  }
  return c;
}

Document to_document(const XmlNode& root) {
  if (root.name != "coca-adl")
    throw Error(ErrorCode::schema_violation, "root element must be <coca-adl>, got <" + root.name + ">");
  Element re(root, {"version"});
  re.no_text();
  Document doc;
  const auto version = re.required("version");
  if (version != "1") re.fail("unsupported version '" + version + "'");
  doc.version = 1;
  std::set<std::string> sections;
  for (const auto& sec : root.children) {
    if (!sections.insert(sec.name).second) Element(sec, {}).fail("section appears twice");
    Element se(sec, {});
    se.no_text();
    if (sec.name == "components") {
      for (const auto& c : sec.children) {
        if (c.name != "component") unknown_child(sec, c);
        doc.components.push_back(parse_component(c));
      }
    } else if (sec.name == "connectors") {
      for (const auto& c : sec.children) {
        if (c.name != "connector") unknown_child(sec, c);
        Element ce(c, {"id", "from", "to", "type"});
        ce.leaf();
        ConnectorDecl k{ce.required("id"), ce.required("from"), ce.required("to"), ConnectorType::message};
        const auto type = ce.required("type");
        if (type == "delegate")
          k.type = ConnectorType::delegate;
        else if (type == "message")
          k.type = ConnectorType::message;
        else if (type == "adaptor")
          k.type = ConnectorType::adaptor;
        else
          ce.fail("unknown connector type '" + type + "'");
        doc.connectors.push_back(std::move(k));
      }
    } else if (sec.name == "configuration") {
      for (const auto& c : sec.children) {
        if (c.name == "activate") {
          Element ae(c, {"component", "layer"});
          ae.leaf();
          doc.configuration.initial_activations.push_back({ae.required("component"), ae.required("layer")});
        } else if (c.name == "property") {
          Element pe(c, {"name", "value"});
          pe.leaf();
          doc.configuration.properties.push_back({pe.required("name"), parse_literal(pe.required("value"))});
        } else {
          unknown_child(sec, c);
        }
      }
    } else if (sec.name == "policies") {
      for (const auto& c : sec.children) {
        if (c.name != "policy") unknown_child(sec, c);
        doc.policies.push_back(parse_policy(c));
      }
    } else {
      unknown_child(root, sec);
    }
  }
  return doc;
}

// ---- serialization ----

std::string escape(std::string_view s, bool attribute) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += attribute ? "&quot;" : "\""; break;
      case '\'': out += attribute ? "&apos;" : "'"; break;
      case '\n': out += attribute ? "&#10;" : "\n"; break;
      case '\t': out += attribute ? "&#9;" : "\t"; break;
      case '\r': out += "&#13;"; break;
      default: out += c;
    }
  }
  return out;
}

class Writer {
 public:
  void open(std::string_view tag, std::initializer_list<std::pair<std::string_view, std::string>> attrs,
            bool self_close) {
    indent();
    out_ += '<';
    out_ += tag;
    for (const auto& [k, v] : attrs) {
      out_ += ' ';
      out_ += k;
      out_ += "=\"";
      out_ += escape(v, true);
      out_ += '"';
    }
    out_ += self_close ? "/>\n" : ">\n";
    if (!self_close) ++depth_;
  }

  void leaf(std::string_view tag, std::initializer_list<std::pair<std::string_view, std::string>> attrs) {
    open(tag, attrs, true);
  }

  void close(std::string_view tag) {
    --depth_;
    indent();
    out_ += "</";
    out_ += tag;
    out_ += ">\n";
  }

  void text_element(std::string_view tag, std::string_view text) {
    indent();
    out_ += '<';
    out_ += tag;
    out_ += '>';
    out_ += escape(text, false);
    out_ += "</";
    out_ += tag;
    out_ += ">\n";
  }

  std::string take() { return std::move(out_); }

 private:
  void indent() { out_.append(static_cast<std::size_t>(depth_) * 2, ' '); }
  std::string out_;
  int depth_ = 0;
};

void write_actions(Writer& w, std::string_view tag, const policy::ActionList& actions) {
  if (actions.empty()) {
    w.leaf(tag, {});
    return;
  }
  w.open(tag, {}, false);
  for (const auto& a : actions) {
    if (const auto* act = std::get_if<adaptation::AdaptationAction>(&a)) {
      std::visit(
          [&w](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            using namespace adaptation;
            if constexpr (std::is_same_v<T, ActivateLayer>) {
              w.leaf("activate", {{"component", x.component}, {"layer", x.layer}});
            } else if constexpr (std::is_same_v<T, DeactivateLayer>) {
              w.leaf("deactivate", {{"component", x.component}, {"layer", x.layer}});
            } else if constexpr (std::is_same_v<T, LoadComponent>) {
              w.leaf("load", {{"component", x.id}});
            } else if constexpr (std::is_same_v<T, ReplaceComponent>) {
              w.leaf("replace", {{"old", x.old_id}, {"new", x.new_id}});
            } else if constexpr (std::is_same_v<T, RebindDelegate>) {
              w.leaf("rebind", {{"component", x.component}, {"target", x.target}});
            } else {
              if (x.args.empty()) {
                w.leaf("invoke", {{"component", x.component}, {"selector", x.selector}});
              } else {
                w.open("invoke", {{"component", x.component}, {"selector", x.selector}}, false);
                for (const auto& v : x.args) w.leaf("arg", {{"value", to_literal(v)}});
                w.close("invoke");
              }
            }
          },
          *act);
    } else if (const auto* s = std::get_if<policy::SetInternal>(&a)) {
      w.leaf("set-internal", {{"name", s->name}, {"value", to_literal(s->value)}});
    } else {
      w.leaf("evaluate-policy", {{"id", std::get<policy::EvaluatePolicy>(a).id}});
    }
  }
  w.close(tag);
}

void write_policy(Writer& w, const policy::DecisionPolicy& p) {
  if (p.structure_style)
    w.open("policy", {{"id", p.id}, {"suit", p.suit}, {"style", *p.structure_style}}, false);
  else
    w.open("policy", {{"id", p.id}, {"suit", p.suit}}, false);
  for (const auto& v : p.internals)
    w.leaf("internal", {{"name", v.name}, {"type", std::string(to_string(v.type))}, {"initial", to_literal(v.initial)}});
  for (const auto& v : p.externals) w.leaf("external", {{"name", v.name}, {"entity", v.entity}});
  for (const auto& r : p.rules) {
    if (r.trigger)
      w.open("rule", {{"trigger", *r.trigger}}, false);
    else
      w.open("rule", {}, false);
    w.text_element("condition", policy::render_expr(r.condition));
    write_actions(w, "action", r.action);
    write_actions(w, "else", r.else_action);
    w.close("rule");
  }
  for (const auto& g : p.goals)
    w.leaf("goal", {{"property", g.property}, {"op", std::string(policy::to_string(g.op))}, {"value", to_literal(g.limit)}});
  w.close("policy");
}

void write_component(Writer& w, const ComponentDecl& c) {
  const bool empty = c.protocol.empty() && c.static_selectors.empty() && c.layers.empty() && c.observes.empty();
  w.open("component", {{"id", c.id}, {"kind", std::string(to_string(c.kind))}}, empty);
  if (empty) return;
  if (!c.protocol.empty()) {
    w.open("protocol", {}, false);
    for (const auto& s : c.protocol) w.leaf("selector", {{"name", s.name}, {"required", s.required ? "true" : "false"}});
    w.close("protocol");
  }
  if (!c.static_selectors.empty()) {
    w.open("static", {}, false);
    for (const auto& s : c.static_selectors) w.leaf("selector", {{"name", s}});
    w.close("static");
  }
  for (const auto& l : c.layers) {
    const bool bare = l.handles.empty();
    if (l.exclusive)
      w.open("layer", {{"id", l.id}, {"policy", l.policy}, {"exclusive", *l.exclusive}}, bare);
    else
      w.open("layer", {{"id", l.id}, {"policy", l.policy}}, bare);
    if (bare) continue;
    for (const auto& s : l.handles) w.leaf("handles", {{"selector", s}});
    w.close("layer");
  }
  for (const auto& e : c.observes) w.leaf("observes", {{"entity", e}});
  w.close("component");
}

}  // namespace

Document parse_adl(std::string_view xml) {
  Document doc = to_document(parse_tree(xml));
  validate(doc);
  return doc;
}

std::string serialize_adl(const Document& doc) {
  Writer w;
  w.open("coca-adl", {{"version", std::to_string(doc.version)}}, false);

  if (doc.components.empty()) {
    w.leaf("components", {});
  } else {
    w.open("components", {}, false);
    for (const auto& c : doc.components) write_component(w, c);
    w.close("components");
  }

  if (doc.connectors.empty()) {
    w.leaf("connectors", {});
  } else {
    w.open("connectors", {}, false);
    for (const auto& k : doc.connectors)
      w.leaf("connector", {{"id", k.id}, {"from", k.from}, {"to", k.to}, {"type", std::string(to_string(k.type))}});
    w.close("connectors");
  }

  const auto& cfg = doc.configuration;
  if (cfg.initial_activations.empty() && cfg.properties.empty()) {
    w.leaf("configuration", {});
  } else {
    w.open("configuration", {}, false);
    for (const auto& a : cfg.initial_activations) w.leaf("activate", {{"component", a.component}, {"layer", a.layer}});
    for (const auto& p : cfg.properties) w.leaf("property", {{"name", p.name}, {"value", to_literal(p.value)}});
    w.close("configuration");
  }

  if (doc.policies.empty()) {
    w.leaf("policies", {});
  } else {
    w.open("policies", {}, false);
    for (const auto& p : doc.policies) write_policy(w, p);
    w.close("policies");
  }

  w.close("coca-adl");
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n" + w.take();
}

}  // namespace cosm::adl
