#include "rtm/sim/service.hpp"

#include <algorithm>
#include <vector>

#include "rtm/meta/json.hpp"

namespace rtm::sim {

namespace {

using ojson = nlohmann::ordered_json;

WireResponse reply(int status, const ojson& body) { return {status, body.dump()}; }

WireResponse error(int status, std::string_view code, const std::string& message) {
  ojson body;
  body["error"] = code;
  body["message"] = message;
  return reply(status, body);
}

int status_of(SimErrc code) {
  switch (code) {
    case SimErrc::UnknownDevice: return 404;
    case SimErrc::NoRecognizer: return 404;
    case SimErrc::ReadOnlyAttribute: return 422;
    case SimErrc::TypeMismatch: return 422;
    case SimErrc::DeviceOffline: return 503;
    case SimErrc::InvalidArgument: return 400;
  }
  return 500;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    std::size_t j = path.find('/', i);
    if (j == std::string_view::npos) j = path.size();
    if (j > i) parts.emplace_back(path.substr(i, j - i));
    i = j + 1;
  }
  return parts;
}

nlohmann::json parse_body(const std::string& body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw SimError(SimErrc::InvalidArgument, "body must be a JSON object");
  }
  return j;
}

/// Decodes {"attrs": {...}} against the device schema. Names outside the
/// schema are reported as read-only: the device has nothing writable there.
meta::AttrMap decode_attrs(const nlohmann::json& body, const SimDevice& d) {
  if (!body.contains("attrs") || !body["attrs"].is_object()) {
    throw SimError(SimErrc::InvalidArgument, "body needs an \"attrs\" object");
  }
  const auto& schema = device_schema(d.type);
  meta::AttrMap out;
  for (const auto& [name, value] : body["attrs"].items()) {
    auto it = std::find_if(schema.begin(), schema.end(),
                           [&](const AttrSchema& a) { return a.name == name; });
    if (it == schema.end()) throw SimError(SimErrc::ReadOnlyAttribute, d.dev_id + "." + name);
    auto v = meta::value_from_json(value, it->type);
    if (!v) {
      throw SimError(SimErrc::TypeMismatch,
                     d.dev_id + "." + name + " expects " + meta::type_name(it->type));
    }
    out[name] = *v;
  }
  return out;
}

}  // namespace

ojson state_to_json(const SimDevice& d) {
  ojson attrs = ojson::object();
  for (const auto& a : device_schema(d.type)) attrs[a.name] = meta::to_json(d.attrs.at(a.name));
  ojson j;
  j["dev_id"] = d.dev_id;
  j["device_type"] = to_string(d.type);
  j["attrs"] = std::move(attrs);
  return j;
}

SimService::SimService(Fleet fleet, bool test_mode)
    : fleet_(std::move(fleet)), test_mode_(test_mode) {}

WireResponse SimService::handle(const WireRequest& req) {
  std::lock_guard lock(mutex_);
  try {
    return route(req);
  } catch (const SimError& e) {
    return error(status_of(e.code()), to_string(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return error(400, "InvalidArgument", e.what());
  }
}

WireResponse SimService::route(const WireRequest& req) {
  const auto parts = split_path(req.path);
  const auto& m = req.method;

  if (m == "GET" && parts.size() == 1 && parts[0] == "devices") {
    ojson list = ojson::array();
    for (const SimDevice* d : fleet_.devices()) {
      ojson entry;
      entry["dev_id"] = d->dev_id;
      entry["device_type"] = to_string(d->type);
      entry["online"] = d->online;
      list.push_back(std::move(entry));
    }
    ojson body;
    body["devices"] = std::move(list);
    return reply(200, body);
  }

  if (parts.size() == 3 && parts[0] == "devices") {
    const std::string& id = parts[1];
    if (parts[2] == "state" && m == "GET") return reply(200, state_to_json(fleet_.get_state(id)));
    if (parts[2] == "state" && m == "PUT") {
      const SimDevice& d = fleet_.get_state(id);
      auto patch = decode_attrs(parse_body(req.body), d);
      return reply(200, state_to_json(fleet_.set_state(id, patch)));
    }
    if (parts[2] == "recognize" && m == "POST") {
      const SimDevice& d = fleet_.get_state(id);
      if (d.type != DeviceType::Recognizer) {
        throw SimError(SimErrc::NoRecognizer, id + " is not a recognizer");
      }
      auto body = parse_body(req.body);
      if (!body.contains("plant_name") || !body["plant_name"].is_string()) {
        throw SimError(SimErrc::InvalidArgument, "body needs a \"plant_name\" string");
      }
      SpeciesProfile p = fleet_.recognize(body["plant_name"].get<std::string>());
      return {200, profile_to_json(p).dump()};
    }
  }

  if (test_mode_ && m == "POST" && !parts.empty() && parts[0] == "sim") {
    if (parts.size() == 2 && parts[1] == "step") {
      auto body = parse_body(req.body);
      if (!body.contains("dt_hours") || !body["dt_hours"].is_number()) {
        throw SimError(SimErrc::InvalidArgument, "body needs a numeric \"dt_hours\"");
      }
      fleet_.step(body["dt_hours"].get<double>());
      ojson out;
      out["sim_time"] = fleet_.sim_time();
      out["day"] = fleet_.day();
      return reply(200, out);
    }
    if (parts.size() == 4 && parts[1] == "devices") {
      const std::string& id = parts[2];
      auto body = parse_body(req.body);
      if (parts[3] == "fault") {
        if (!body.contains("offline") || !body["offline"].is_boolean()) {
          throw SimError(SimErrc::InvalidArgument, "body needs a boolean \"offline\"");
        }
        fleet_.set_online(id, !body["offline"].get<bool>());
        return reply(200, state_to_json(fleet_.truth(id)));
      }
      if (parts[3] == "inject") {
        const SimDevice& d = fleet_.truth(id);
        if (!body.contains("attrs") || !body["attrs"].is_object()) {
          throw SimError(SimErrc::InvalidArgument, "body needs an \"attrs\" object");
        }
        meta::AttrMap attrs;
        for (const auto& [name, value] : body["attrs"].items()) {
          const auto& schema = device_schema(d.type);
          auto it = std::find_if(schema.begin(), schema.end(),
                                 [&](const AttrSchema& a) { return a.name == name; });
          if (it == schema.end()) throw SimError(SimErrc::InvalidArgument, "no attribute " + name);
          auto v = meta::value_from_json(value, it->type);
          if (!v) throw SimError(SimErrc::TypeMismatch, id + "." + name);
          attrs[name] = *v;
        }
        fleet_.inject(id, attrs);
        return reply(200, state_to_json(fleet_.truth(id)));
      }
    }
  }

  return error(404, "NotFound", m + " " + req.path);
}

}  // namespace rtm::sim
