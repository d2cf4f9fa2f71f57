#include "cosm/value.hpp"

#include <charconv>
#include <system_error>

namespace cosm {

std::string_view to_string(ValueType t) {
  switch (t) {
    case ValueType::number: return "number";
    case ValueType::string: return "string";
    case ValueType::boolean: return "bool";
  }
  return "?";
}

std::optional<ValueType> parse_value_type(std::string_view name) {
  if (name == "number") return ValueType::number;
  if (name == "string") return ValueType::string;
  if (name == "bool") return ValueType::boolean;
  return std::nullopt;
}

namespace {

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  const char c = text.front();
  if (!(c == '-' || c == '+' || c == '.' || (c >= '0' && c <= '9'))) return std::nullopt;
  if (c == '+') text.remove_prefix(1);
  double out = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return out;
}

}  // namespace

std::string to_literal(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, *d);
    return std::string(buf, ptr);
  }
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  return std::get<std::string>(v);
}

Value parse_literal(std::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  if (auto d = parse_number(text)) return *d;
  return std::string(text);
}

std::optional<Value> parse_typed_literal(std::string_view text, ValueType type) {
  switch (type) {
    case ValueType::number:
      if (auto d = parse_number(text)) return Value{*d};
      return std::nullopt;
    case ValueType::boolean:
      if (text == "true") return Value{true};
      if (text == "false") return Value{false};
      return std::nullopt;
    case ValueType::string:
      return Value{std::string(text)};
  }
  return std::nullopt;
}

}  // namespace cosm
