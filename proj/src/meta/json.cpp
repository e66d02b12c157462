#include "rtm/meta/json.hpp"

namespace rtm::meta {

nlohmann::json to_json(const Value& v) {
  return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

std::optional<Value> value_from_json(const nlohmann::json& j, const AttrType& type) {
  switch (type.kind) {
    case ValueKind::Int:
      if (j.is_number_integer()) return Value{j.get<std::int64_t>()};
      return std::nullopt;
    case ValueKind::Float:
      if (j.is_number()) return Value{j.get<double>()};
      return std::nullopt;
    case ValueKind::Bool:
      if (j.is_boolean()) return Value{j.get<bool>()};
      return std::nullopt;
    case ValueKind::String:
    case ValueKind::Enum: {
      if (!j.is_string()) return std::nullopt;
      Value v{j.get<std::string>()};
      if (!conforms(v, type)) return std::nullopt;
      return v;
    }
  }
  return std::nullopt;
}

nlohmann::json to_json(const ModelElement& e) {
  nlohmann::json attrs = nlohmann::json::object();
  for (const auto& [k, v] : e.attrs) attrs[k] = to_json(v);
  nlohmann::json out = {{"id", e.id}, {"class", e.class_name}, {"attrs", std::move(attrs)}};
  if (!e.refs.empty()) {
    nlohmann::json refs = nlohmann::json::object();
    for (const auto& [k, v] : e.refs) refs[k] = v;
    out["refs"] = std::move(refs);
  }
  return out;
}

nlohmann::json to_json(const Model& m) {
  nlohmann::json elements = nlohmann::json::array();
  for (const auto& [id, e] : m.elements()) elements.push_back(to_json(e));
  return {{"model", std::string(to_string(m.tag()))},
          {"root", m.root() ? nlohmann::json(*m.root()) : nlohmann::json(nullptr)},
          {"elements", std::move(elements)}};
}

nlohmann::json to_json(const ChangeEvent& ev) {
  nlohmann::json out = {{"model", std::string(to_string(ev.model))},
                        {"element", ev.element_id},
                        {"kind", std::string(to_string(ev.kind))},
                        {"origin", std::string(to_string(ev.origin))}};
  switch (ev.kind) {
    case ChangeKind::Created: {
      out["class"] = ev.class_name;
      nlohmann::json attrs = nlohmann::json::object();
      for (const auto& [k, v] : ev.attrs) attrs[k] = to_json(v);
      out["attrs"] = std::move(attrs);
      break;
    }
    case ChangeKind::AttrChanged:
      out["attr"] = ev.attr;
      out["old"] = ev.old_value ? to_json(*ev.old_value) : nlohmann::json(nullptr);
      out["new"] = ev.new_value ? to_json(*ev.new_value) : nlohmann::json(nullptr);
      break;
    case ChangeKind::Linked:
    case ChangeKind::Unlinked:
      out["ref"] = ev.attr;
      out["target"] = ev.target_id;
      break;
    case ChangeKind::Deleted: break;
  }
  return out;
}

}  // namespace rtm::meta
