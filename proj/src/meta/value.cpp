#include "rtm/meta/value.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdio>

namespace rtm::meta {

bool same_value(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  if (const auto* da = std::get_if<double>(&a)) {
    return std::bit_cast<std::uint64_t>(*da) ==
           std::bit_cast<std::uint64_t>(std::get<double>(b));
  }
  return a == b;
}

bool conforms(const Value& v, const AttrType& type) {
  switch (type.kind) {
    case ValueKind::Int: return std::holds_alternative<std::int64_t>(v);
    case ValueKind::Float: return std::holds_alternative<double>(v);
    case ValueKind::Bool: return std::holds_alternative<bool>(v);
    case ValueKind::String: return std::holds_alternative<std::string>(v);
    case ValueKind::Enum: {
      const auto* s = std::get_if<std::string>(&v);
      return s != nullptr && std::find(type.enum_values.begin(), type.enum_values.end(), *s) !=
                                 type.enum_values.end();
    }
  }
  return false;
}

std::optional<Value> coerce(const Value& v, const AttrType& type) {
  if (conforms(v, type)) return v;
  if (type.kind == ValueKind::Float) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return Value{static_cast<double>(*i)};
  }
  return std::nullopt;
}

Value default_value(const AttrType& type) {
  switch (type.kind) {
    case ValueKind::Int: return std::int64_t{0};
    case ValueKind::Float: return 0.0;
    case ValueKind::Bool: return false;
    case ValueKind::String: return std::string{};
    case ValueKind::Enum:
      return type.enum_values.empty() ? std::string{} : type.enum_values.front();
  }
  return std::int64_t{0};
}

std::string type_name(const AttrType& type) {
  switch (type.kind) {
    case ValueKind::Int: return "Int";
    case ValueKind::Float: return "Float";
    case ValueKind::Bool: return "Bool";
    case ValueKind::String: return "String";
    case ValueKind::Enum: {
      std::string out = "Enum(";
      for (std::size_t i = 0; i < type.enum_values.size(); ++i) {
        if (i) out += '|';
        out += type.enum_values[i];
      }
      return out + ")";
    }
  }
  return "?";
}

namespace {

bool is_ident(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_' || u == '-';
  });
}

}  // namespace

std::optional<AttrType> parse_type_name(std::string_view text) {
  if (text == "Int") return AttrType::integer();
  if (text == "Float") return AttrType::floating();
  if (text == "Bool") return AttrType::boolean();
  if (text == "String") return AttrType::string();
  if (text.starts_with("Enum(") && text.ends_with(")")) {
    std::string_view body = text.substr(5, text.size() - 6);
    std::vector<std::string> values;
    while (true) {
      auto bar = body.find('|');
      std::string_view item = body.substr(0, bar);
      if (!is_ident(item)) return std::nullopt;
      if (std::find(values.begin(), values.end(), item) != values.end()) return std::nullopt;
      values.emplace_back(item);
      if (bar == std::string_view::npos) break;
      body.remove_prefix(bar + 1);
    }
    return AttrType::enumeration(std::move(values));
  }
  return std::nullopt;
}

std::string format_value(const Value& v) {
  struct Visitor {
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", d);
      return buf;
    }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return "'" + s + "'"; }
  };
  return std::visit(Visitor{}, v);
}

std::string_view kind_name(const Value& v) {
  switch (v.index()) {
    case 0: return "Int";
    case 1: return "Float";
    case 2: return "Bool";
    default: return "String";
  }
}

}  // namespace rtm::meta
