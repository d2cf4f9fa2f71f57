#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace cosm {

/// A context or policy value: number, string or boolean.
using Value = std::variant<double, std::string, bool>;

enum class ValueType { number, string, boolean };

inline ValueType type_of(const Value& v) {
  switch (v.index()) {
    case 0: return ValueType::number;
    case 1: return ValueType::string;
    default: return ValueType::boolean;
  }
}

std::string_view to_string(ValueType t);
std::optional<ValueType> parse_value_type(std::string_view name);

/// Renders a value as a bare literal: shortest round-trip form for numbers,
/// `true`/`false` for booleans, the raw text for strings.
std::string to_literal(const Value& v);

/// Inverse of to_literal. Typing is by form: `true`/`false` are booleans,
/// text starting with a digit, sign or dot that parses fully is a number,
/// everything else is a string.
Value parse_literal(std::string_view text);

/// Parses `text` as a literal of a fixed type; nullopt on mismatch.
std::optional<Value> parse_typed_literal(std::string_view text, ValueType type);

}  // namespace cosm
