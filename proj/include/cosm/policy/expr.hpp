#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cosm/value.hpp"

namespace cosm::policy {

enum class CompareOp { lt, le, eq, ne, ge, gt };

std::string_view to_string(CompareOp op);
std::optional<CompareOp> parse_compare_op(std::string_view text);
bool is_ordering(CompareOp op);

/// Condition grammar:
///   expr    := conj ('or' conj)*
///   conj    := unary ('and' unary)*
///   unary   := 'not' unary | '(' expr ')' | var op literal
///   literal := number | "quoted string" | true | false
/// `&&`, `||` and `!` are accepted as spellings of and/or/not.
struct BoolExpr {
  enum class Kind { compare, conj, disj, negate };

  Kind kind = Kind::compare;
  // compare
  std::string var;
  CompareOp op = CompareOp::eq;
  Value literal = 0.0;
  // conj / disj / negate
  std::vector<BoolExpr> operands;

  static BoolExpr compare(std::string var, CompareOp op, Value literal);
  static BoolExpr all_of(std::vector<BoolExpr> ops);
  static BoolExpr any_of(std::vector<BoolExpr> ops);
  static BoolExpr negation(BoolExpr e);

  friend bool operator==(const BoolExpr&, const BoolExpr&) = default;
};

/// Throws Error{parse_error} on malformed input.
BoolExpr parse_expr(std::string_view text);

/// Canonical infix rendering; parse_expr(render_expr(e)) == e.
std::string render_expr(const BoolExpr& e);

/// Every variable mentioned, in first-occurrence order.
std::vector<std::string> variables_of(const BoolExpr& e);

using VariableLookup = std::function<std::optional<Value>(std::string_view)>;

/// Evaluates with short-circuiting. Throws Error{unbound_external_variable}
/// for variables the lookup cannot resolve and Error{type_error} for
/// ill-typed comparisons.
bool evaluate(const BoolExpr& e, const VariableLookup& lookup);

/// Compares two values under `op`; Error{type_error} on mismatch.
bool compare_values(const Value& lhs, CompareOp op, const Value& rhs);

}  // namespace cosm::policy
