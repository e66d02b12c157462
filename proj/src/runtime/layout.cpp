#include "rtm/runtime/layout.hpp"

#include <algorithm>

#include "rtm/meta/metamodel_text.hpp"

namespace rtm::runtime {

std::string_view runtime_metamodel_text() {
  return R"(# Runtime model: one element per device, owned by the SmartHomeOS root.
class SmartHomeOS
  attr name:String:readonly
  ref devices->Device[0..*]
  ref sockets->Socket[0..*]
end

class Device
  attr dev_id:String:readonly
  attr device_type:String:readonly
  attr online:Bool:readonly
  attr accumulated_light:Float:readonly
  attr temperature:Float:readonly
  attr soil_moisture:Float:readonly
  attr soil_fertility:Float:readonly
  attr plant_name:String
  attr species:String:readonly
  attr light_min:Float:readonly
  attr light_max:Float:readonly
  attr temperature_min:Float:readonly
  attr temperature_max:Float:readonly
  attr moisture_min:Float:readonly
  attr moisture_max:Float:readonly
  attr fertility_min:Float:readonly
  attr fertility_max:Float:readonly
end

class Socket
  attr dev_id:String:readonly
  attr device_type:String:readonly
  attr online:Bool:readonly
  attr power:Bool
end
)";
}

std::shared_ptr<const meta::Metamodel> runtime_metamodel() {
  static const std::shared_ptr<const meta::Metamodel> mm =
      meta::parse_metamodel(runtime_metamodel_text(), "runtime");
  return mm;
}

std::string_view runtime_class(sim::DeviceType type) {
  return type == sim::DeviceType::SmartPlug ? "Socket" : "Device";
}

std::string_view root_reference(sim::DeviceType type) {
  return type == sim::DeviceType::SmartPlug ? "sockets" : "devices";
}

std::string_view to_string(RuntimeErrc code) {
  switch (code) {
    case RuntimeErrc::DuplicateDevice: return "DuplicateDevice";
    case RuntimeErrc::DescriptorInvalid: return "DescriptorInvalid";
    case RuntimeErrc::UnknownDevice: return "UnknownDevice";
    case RuntimeErrc::ReadOnlyAttribute: return "ReadOnlyAttribute";
    case RuntimeErrc::TypeMismatch: return "TypeMismatch";
    case RuntimeErrc::DeviceOffline: return "DeviceOffline";
    case RuntimeErrc::WriteFailed: return "WriteFailed";
  }
  return "RuntimeError";
}

namespace {

const DescriptorAttr* find_in(const std::vector<DescriptorAttr>& v, std::string_view name) {
  auto it = std::find_if(v.begin(), v.end(), [&](const DescriptorAttr& a) { return a.name == name; });
  return it == v.end() ? nullptr : &*it;
}

const sim::AttrSchema* wire_attr(sim::DeviceType type, std::string_view name) {
  const auto& schema = sim::device_schema(type);
  auto it = std::find_if(schema.begin(), schema.end(),
                         [&](const sim::AttrSchema& a) { return a.name == name; });
  return it == schema.end() ? nullptr : &*it;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

const DescriptorAttr* DeviceDescriptor::find_readable(std::string_view name) const {
  return find_in(readable, name);
}

const DescriptorAttr* DeviceDescriptor::find_writable(std::string_view name) const {
  return find_in(writable, name);
}

DeviceDescriptor default_descriptor(std::string dev_id, sim::DeviceType type) {
  DeviceDescriptor d;
  d.dev_id = std::move(dev_id);
  d.device_type = type;
  for (const auto& a : sim::device_schema(type)) {
    d.readable.push_back({a.name, a.type});
    if (a.writable) d.writable.push_back({a.name, a.type});
  }
  return d;
}

std::vector<std::string> descriptor_problems(const DeviceDescriptor& d) {
  std::vector<std::string> out;
  if (!is_identifier(d.dev_id)) out.push_back("dev_id '" + d.dev_id + "' is not an identifier");
  if (d.poll_interval < 1) out.push_back("poll_interval must be >= 1 tick");
  if (d.offline_after < 1) out.push_back("offline_after must be >= 1");
  const meta::MetaClass& cls = runtime_metamodel()->at(runtime_class(d.device_type));
  auto check = [&](const DescriptorAttr& a, bool writable) {
    const meta::AttributeDef* def = cls.attribute(a.name);
    if (!def || a.name == "dev_id" || a.name == "device_type" || a.name == "online") {
      out.push_back("attribute '" + a.name + "' is not a device attribute of " + cls.name);
      return;
    }
    if (!(def->type == a.type)) {
      out.push_back("attribute '" + a.name + "' is " + meta::type_name(def->type) + ", not " +
                    meta::type_name(a.type));
    }
    const sim::AttrSchema* wire = wire_attr(d.device_type, a.name);
    if (!wire) {
      out.push_back("attribute '" + a.name + "' is not reported by " +
                    std::string(sim::to_string(d.device_type)) + " devices");
    } else if (writable && !wire->writable) {
      out.push_back("attribute '" + a.name + "' is read-only on the device");
    }
    if (writable && !def->writable) {
      out.push_back("attribute '" + a.name + "' is read-only in the runtime model");
    }
  };
  for (const auto& a : d.readable) check(a, false);
  for (const auto& a : d.writable) {
    check(a, true);
    if (const DescriptorAttr* r = d.find_readable(a.name); r && !(r->type == a.type)) {
      out.push_back("attribute '" + a.name + "' declared with two types");
    }
  }
  return out;
}

std::vector<DeviceDescriptor> descriptors_from_json(const nlohmann::json& roster,
                                                    const std::string& file,
                                                    std::vector<Diagnostic>& diags) {
  std::vector<DeviceDescriptor> out;
  auto report = [&](std::string pointer, std::string subject, std::string message) {
    diags.push_back({Severity::Error, {file, 0, 0, std::move(pointer)}, std::move(subject),
                     std::move(message)});
  };
  if (!roster.is_object() || !roster.contains("devices") || !roster["devices"].is_array()) {
    report("/devices", "", "roster needs a \"devices\" array");
    return out;
  }
  const auto& devices = roster["devices"];
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const auto& e = devices[i];
    const std::string ptr = "/devices/" + std::to_string(i);
    if (!e.is_object()) {
      report(ptr, "", "device entry must be an object");
      continue;
    }
    std::string dev_id = e.contains("dev_id") && e["dev_id"].is_string() ? e["dev_id"].get<std::string>() : "";
    if (dev_id.empty()) {
      report(ptr + "/dev_id", "", "missing dev_id");
      continue;
    }
    std::optional<sim::DeviceType> type;
    if (e.contains("device_type") && e["device_type"].is_string()) {
      type = sim::parse_device_type(e["device_type"].get<std::string>());
    }
    if (!type) {
      report(ptr + "/device_type", dev_id,
             "device_type must be one of PlantMonitor, SmartPlug, Recognizer");
      continue;
    }
    DeviceDescriptor d = default_descriptor(dev_id, *type);
    bool ok = true;
    auto read_int = [&](const char* key, int& field) {
      if (!e.contains(key)) return;
      if (!e[key].is_number_integer()) {
        report(ptr + "/" + key, dev_id, std::string(key) + " must be an integer");
        ok = false;
        return;
      }
      field = e[key].get<int>();
    };
    read_int("poll_interval", d.poll_interval);
    read_int("offline_after", d.offline_after);
    if (e.contains("base_url")) {
      if (e["base_url"].is_string()) {
        d.base_url = e["base_url"].get<std::string>();
      } else {
        report(ptr + "/base_url", dev_id, "base_url must be a string");
        ok = false;
      }
    }
    auto read_attrs = [&](const char* key, std::vector<DescriptorAttr>& field) {
      if (!e.contains(key)) return;
      if (!e[key].is_object()) {
        report(ptr + "/" + key, dev_id, std::string(key) + " must map names to type names");
        ok = false;
        return;
      }
      field.clear();
      for (const auto& [name, t] : e[key].items()) {
        auto type_ = t.is_string() ? meta::parse_type_name(t.get<std::string>()) : std::nullopt;
        if (!type_) {
          report(ptr + "/" + key + "/" + name, dev_id, "unknown type for '" + name + "'");
          ok = false;
          continue;
        }
        field.push_back({name, *type_});
      }
    };
    read_attrs("readable", d.readable);
    read_attrs("writable", d.writable);
    for (const auto& p : descriptor_problems(d)) {
      report(ptr, dev_id, p);
      ok = false;
    }
    if (std::any_of(out.begin(), out.end(), [&](const DeviceDescriptor& x) { return x.dev_id == dev_id; })) {
      report(ptr + "/dev_id", dev_id, "duplicate dev_id");
      ok = false;
    }
    if (ok) out.push_back(std::move(d));
  }
  return out;
}

}  // namespace rtm::runtime
