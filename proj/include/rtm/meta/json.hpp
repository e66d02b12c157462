#pragma once

#include <optional>

#include <json.hpp>

#include "rtm/meta/model.hpp"
#include "rtm/meta/value.hpp"

namespace rtm::meta {

nlohmann::json to_json(const Value& v);

/// Decodes a JSON scalar against a declared type. Integral JSON numbers are
/// accepted for Float attributes.
std::optional<Value> value_from_json(const nlohmann::json& j, const AttrType& type);

nlohmann::json to_json(const ModelElement& e);

/// {"model": tag, "root": id|null, "elements": [element...]} in id order.
nlohmann::json to_json(const Model& m);

nlohmann::json to_json(const ChangeEvent& ev);

}  // namespace rtm::meta
