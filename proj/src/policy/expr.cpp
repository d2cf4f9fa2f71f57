#include "cosm/policy/expr.hpp"

#include <cctype>

#include "cosm/error.hpp"

namespace cosm::policy {

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::lt: return "<";
    case CompareOp::le: return "<=";
    case CompareOp::eq: return "==";
    case CompareOp::ne: return "!=";
    case CompareOp::ge: return ">=";
    case CompareOp::gt: return ">";
  }
  return "?";
}

std::optional<CompareOp> parse_compare_op(std::string_view text) {
  if (text == "<") return CompareOp::lt;
  if (text == "<=") return CompareOp::le;
  if (text == "==") return CompareOp::eq;
  if (text == "!=") return CompareOp::ne;
  if (text == ">=") return CompareOp::ge;
  if (text == ">") return CompareOp::gt;
  return std::nullopt;
}

bool is_ordering(CompareOp op) { return op != CompareOp::eq && op != CompareOp::ne; }

BoolExpr BoolExpr::compare(std::string var, CompareOp op, Value literal) {
  BoolExpr e;
  e.kind = Kind::compare;
  e.var = std::move(var);
  e.op = op;
  e.literal = std::move(literal);
  return e;
}

BoolExpr BoolExpr::all_of(std::vector<BoolExpr> ops) {
  BoolExpr e;
  e.kind = Kind::conj;
  e.operands = std::move(ops);
  return e;
}

BoolExpr BoolExpr::any_of(std::vector<BoolExpr> ops) {
  BoolExpr e;
  e.kind = Kind::disj;
  e.operands = std::move(ops);
  return e;
}

BoolExpr BoolExpr::negation(BoolExpr inner) {
  BoolExpr e;
  e.kind = Kind::negate;
  e.operands.push_back(std::move(inner));
  return e;
}

namespace {

enum class Tok { ident, number, string, op, kw_and, kw_or, kw_not, kw_true, kw_false, lparen, rparen, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

[[noreturn]] void fail(std::string_view src, std::size_t pos, const std::string& what) {
  throw Error(ErrorCode::parse_error,
              "condition '" + std::string(src) + "' at " + std::to_string(pos) + ": " + what);
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; };
  auto is_ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (c == '(') {
      out.push_back({Tok::lparen, "(", i++});
    } else if (c == ')') {
      out.push_back({Tok::rparen, ")", i++});
    } else if (c == '&' && i + 1 < src.size() && src[i + 1] == '&') {
      out.push_back({Tok::kw_and, "and", i});
      i += 2;
    } else if (c == '|' && i + 1 < src.size() && src[i + 1] == '|') {
      out.push_back({Tok::kw_or, "or", i});
      i += 2;
    } else if (c == '<' || c == '>' || c == '=' || c == '!') {
      std::string op(1, c);
      if (i + 1 < src.size() && src[i + 1] == '=') op += '=';
      i += op.size();
      if (op == "!") {
        out.push_back({Tok::kw_not, "not", start});
      } else if (op == "=") {
        fail(src, start, "'=' is not an operator; use '=='");
      } else {
        out.push_back({Tok::op, op, start});
      }
    } else if (c == '"') {
      std::string s;
      ++i;
      bool closed = false;
      while (i < src.size()) {
        if (src[i] == '\\' && i + 1 < src.size()) {
          s += src[i + 1];
          i += 2;
        } else if (src[i] == '"') {
          ++i;
          closed = true;
          break;
        } else {
          s += src[i++];
        }
      }
      if (!closed) fail(src, start, "unterminated string");
      out.push_back({Tok::string, std::move(s), start});
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      ++i;
      while (i < src.size()) {
        const char d = src[i];
        const bool exp_sign = (d == '+' || d == '-') && (src[i - 1] == 'e' || src[i - 1] == 'E');
        if (std::isdigit(static_cast<unsigned char>(d)) || d == '.' || d == 'e' || d == 'E' || exp_sign)
          ++i;
        else
          break;
      }
      out.push_back({Tok::number, std::string(src.substr(start, i - start)), start});
    } else if (is_ident_start(c)) {
      while (i < src.size() && is_ident_char(src[i])) ++i;
      std::string word(src.substr(start, i - start));
      Tok kind = Tok::ident;
      if (word == "and") kind = Tok::kw_and;
      else if (word == "or") kind = Tok::kw_or;
      else if (word == "not") kind = Tok::kw_not;
      else if (word == "true") kind = Tok::kw_true;
      else if (word == "false") kind = Tok::kw_false;
      out.push_back({kind, std::move(word), start});
    } else {
      fail(src, i, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::end, "", src.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src), toks_(tokenize(src)) {}

  BoolExpr parse() {
    BoolExpr e = expr();
    if (peek().kind != Tok::end) fail(src_, peek().pos, "trailing input '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  BoolExpr expr() {
    std::vector<BoolExpr> ops{conj()};
    while (peek().kind == Tok::kw_or) {
      next();
      ops.push_back(conj());
    }
    return ops.size() == 1 ? std::move(ops.front()) : BoolExpr::any_of(std::move(ops));
  }

  BoolExpr conj() {
    std::vector<BoolExpr> ops{unary()};
    while (peek().kind == Tok::kw_and) {
      next();
      ops.push_back(unary());
    }
    return ops.size() == 1 ? std::move(ops.front()) : BoolExpr::all_of(std::move(ops));
  }

  BoolExpr unary() {
    const Token& t = next();
    if (t.kind == Tok::kw_not) return BoolExpr::negation(unary());
    if (t.kind == Tok::lparen) {
      BoolExpr inner = expr();
      if (next().kind != Tok::rparen) fail(src_, toks_[pos_ - 1].pos, "expected ')'");
      return inner;
    }
    if (t.kind != Tok::ident) fail(src_, t.pos, "expected a variable, got '" + t.text + "'");
    const Token& op = next();
    if (op.kind != Tok::op) fail(src_, op.pos, "expected a comparison operator");
    return BoolExpr::compare(t.text, *parse_compare_op(op.text), literal());
  }

  Value literal() {
    const Token& t = next();
    switch (t.kind) {
      case Tok::kw_true: return true;
      case Tok::kw_false: return false;
      case Tok::string: return t.text;
      case Tok::number: {
        if (auto v = parse_typed_literal(t.text, ValueType::number)) return *v;
        fail(src_, t.pos, "bad number '" + t.text + "'");
      }
      default: fail(src_, t.pos, "expected a literal");
    }
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

void render(const BoolExpr& e, std::string& out) {
  auto child = [&out](const BoolExpr& c) {
    if (c.kind == BoolExpr::Kind::compare) {
      render(c, out);
    } else {
      out += '(';
      render(c, out);
      out += ')';
    }
  };
  switch (e.kind) {
    case BoolExpr::Kind::compare:
      out += e.var;
      out += ' ';
      out += to_string(e.op);
      out += ' ';
      out += std::holds_alternative<std::string>(e.literal) ? quote(std::get<std::string>(e.literal))
                                                            : to_literal(e.literal);
      break;
    case BoolExpr::Kind::negate:
      out += "not ";
      child(e.operands.front());
      break;
    case BoolExpr::Kind::conj:
    case BoolExpr::Kind::disj: {
      const char* sep = e.kind == BoolExpr::Kind::conj ? " and " : " or ";
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i) out += sep;
        child(e.operands[i]);
      }
      break;
    }
  }
}

void collect(const BoolExpr& e, std::vector<std::string>& out) {
  if (e.kind == BoolExpr::Kind::compare) {
    for (const auto& v : out)
      if (v == e.var) return;
    out.push_back(e.var);
    return;
  }
  for (const auto& o : e.operands) collect(o, out);
}

}  // namespace

BoolExpr parse_expr(std::string_view text) { return Parser(text).parse(); }

std::string render_expr(const BoolExpr& e) {
  std::string out;
  render(e, out);
  return out;
}

std::vector<std::string> variables_of(const BoolExpr& e) {
  std::vector<std::string> out;
  collect(e, out);
  return out;
}

bool compare_values(const Value& lhs, CompareOp op, const Value& rhs) {
  if (lhs.index() != rhs.index())
    throw Error(ErrorCode::type_error, "cannot compare " + std::string(to_string(type_of(lhs))) + " with " +
                                           std::string(to_string(type_of(rhs))));
  if (const auto* l = std::get_if<double>(&lhs)) {
    const double r = std::get<double>(rhs);
    switch (op) {
      case CompareOp::lt: return *l < r;
      case CompareOp::le: return *l <= r;
      case CompareOp::eq: return *l == r;
      case CompareOp::ne: return *l != r;
      case CompareOp::ge: return *l >= r;
      case CompareOp::gt: return *l > r;
    }
  }
  if (is_ordering(op))
    throw Error(ErrorCode::type_error,
                "ordering comparison '" + std::string(to_string(op)) + "' on " + std::string(to_string(type_of(lhs))));
  const bool equal = lhs == rhs;
  return op == CompareOp::eq ? equal : !equal;
}

bool evaluate(const BoolExpr& e, const VariableLookup& lookup) {
  switch (e.kind) {
    case BoolExpr::Kind::compare: {
      auto v = lookup(e.var);
      if (!v) throw Error(ErrorCode::unbound_external_variable, "variable '" + e.var + "' has no value");
      return compare_values(*v, e.op, e.literal);
    }
    case BoolExpr::Kind::negate: return !evaluate(e.operands.front(), lookup);
    case BoolExpr::Kind::conj:
      for (const auto& o : e.operands)
        if (!evaluate(o, lookup)) return false;
      return true;
    case BoolExpr::Kind::disj:
      for (const auto& o : e.operands)
        if (evaluate(o, lookup)) return true;
      return false;
  }
  return false;
}

}  // namespace cosm::policy
