#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rtm::meta {

enum class ValueKind { Int, Float, Bool, String, Enum };

/// Declared type of an attribute. Enum values are stored as strings.
struct AttrType {
  ValueKind kind = ValueKind::Int;
  std::vector<std::string> enum_values;

  static AttrType integer() { return {ValueKind::Int, {}}; }
  static AttrType floating() { return {ValueKind::Float, {}}; }
  static AttrType boolean() { return {ValueKind::Bool, {}}; }
  static AttrType string() { return {ValueKind::String, {}}; }
  static AttrType enumeration(std::vector<std::string> values) {
    return {ValueKind::Enum, std::move(values)};
  }

  friend bool operator==(const AttrType&, const AttrType&) = default;
};

using Value = std::variant<std::int64_t, double, bool, std::string>;

/// Kernel equality: Floats compare by bit pattern, everything else by value.
bool same_value(const Value& a, const Value& b);

bool conforms(const Value& v, const AttrType& type);

/// Returns `v` converted to `type` when the only difference is Int→Float
/// promotion; nullopt when the value does not fit the type.
std::optional<Value> coerce(const Value& v, const AttrType& type);

Value default_value(const AttrType& type);

/// "Int", "Float", "Bool", "String" or "Enum(a|b|c)".
std::string type_name(const AttrType& type);
std::optional<AttrType> parse_type_name(std::string_view text);

/// Human-readable rendering for logs and diagnostics.
std::string format_value(const Value& v);

std::string_view kind_name(const Value& v);

}  // namespace rtm::meta
