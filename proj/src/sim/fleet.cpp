#include "rtm/sim/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rtm/meta/json.hpp"

namespace rtm::sim {

using meta::AttrType;
using meta::Value;

std::string_view to_string(DeviceType t) {
  switch (t) {
    case DeviceType::PlantMonitor: return "PlantMonitor";
    case DeviceType::SmartPlug: return "SmartPlug";
    case DeviceType::Recognizer: return "Recognizer";
  }
  return "?";
}

std::optional<DeviceType> parse_device_type(std::string_view s) {
  if (s == "PlantMonitor") return DeviceType::PlantMonitor;
  if (s == "SmartPlug") return DeviceType::SmartPlug;
  if (s == "Recognizer") return DeviceType::Recognizer;
  return std::nullopt;
}

std::string_view to_string(Powers p) {
  switch (p) {
    case Powers::None: return "none";
    case Powers::Lamp: return "lamp";
    case Powers::Pump: return "pump";
  }
  return "?";
}

std::optional<Powers> parse_powers(std::string_view s) {
  if (s == "none") return Powers::None;
  if (s == "lamp") return Powers::Lamp;
  if (s == "pump") return Powers::Pump;
  return std::nullopt;
}

std::string_view to_string(SimErrc code) {
  switch (code) {
    case SimErrc::UnknownDevice: return "UnknownDevice";
    case SimErrc::ReadOnlyAttribute: return "ReadOnlyAttribute";
    case SimErrc::TypeMismatch: return "TypeMismatch";
    case SimErrc::DeviceOffline: return "DeviceOffline";
    case SimErrc::NoRecognizer: return "NoRecognizer";
    case SimErrc::InvalidArgument: return "InvalidArgument";
  }
  return "SimError";
}

const std::vector<AttrSchema>& device_schema(DeviceType t) {
  static const std::vector<AttrSchema> monitor = {
      {"accumulated_light", AttrType::floating()},
      {"temperature", AttrType::floating()},
      {"soil_moisture", AttrType::floating()},
      {"soil_fertility", AttrType::floating()},
      {"plant_name", AttrType::string()},
      {"species", AttrType::string()},
      {"light_min", AttrType::floating()},
      {"light_max", AttrType::floating()},
      {"temperature_min", AttrType::floating()},
      {"temperature_max", AttrType::floating()},
      {"moisture_min", AttrType::floating()},
      {"moisture_max", AttrType::floating()},
      {"fertility_min", AttrType::floating()},
      {"fertility_max", AttrType::floating()},
  };
  static const std::vector<AttrSchema> plug = {{"power", AttrType::boolean(), true}};
  static const std::vector<AttrSchema> recognizer = {
      {"plant_name", AttrType::string(), true},
      {"species", AttrType::string()},
  };
  switch (t) {
    case DeviceType::PlantMonitor: return monitor;
    case DeviceType::SmartPlug: return plug;
    case DeviceType::Recognizer: return recognizer;
  }
  return plug;
}

namespace {

const AttrSchema* schema_entry(DeviceType t, std::string_view attr) {
  const auto& s = device_schema(t);
  auto it = std::find_if(s.begin(), s.end(), [&](const AttrSchema& a) { return a.name == attr; });
  return it == s.end() ? nullptr : &*it;
}

void check_rate(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw SimError(SimErrc::InvalidArgument, std::string(name) + " must be a finite value >= 0");
  }
}

}  // namespace

void SimConfig::check() const {
  check_rate(ambient_light_rate, "ambient_light_rate");
  check_rate(daylight_hours, "daylight_hours");
  check_rate(lamp_light_rate, "lamp_light_rate");
  check_rate(moisture_decay_rate, "moisture_decay_rate");
  check_rate(pump_fill_rate, "pump_fill_rate");
  check_rate(temperature_amplitude, "temperature_amplitude");
  check_rate(fertility_decay_rate, "fertility_decay_rate");
  if (!std::isfinite(temperature_mean)) {
    throw SimError(SimErrc::InvalidArgument, "temperature_mean must be finite");
  }
  if (!(day_length > 0.0) || !std::isfinite(day_length)) {
    throw SimError(SimErrc::InvalidArgument, "day_length must be > 0");
  }
}

namespace {

void set_ranges(SimDevice& d, const SpeciesProfile& profile, std::string_view plant_name) {
  d.attrs["plant_name"] = std::string(plant_name);
  d.attrs["species"] = profile.species;
  d.attrs["light_min"] = profile.accumulated_light.min;
  d.attrs["light_max"] = profile.accumulated_light.max;
  d.attrs["temperature_min"] = profile.temperature.min;
  d.attrs["temperature_max"] = profile.temperature.max;
  d.attrs["moisture_min"] = profile.soil_moisture.min;
  d.attrs["moisture_max"] = profile.soil_moisture.max;
  d.attrs["fertility_min"] = profile.soil_fertility.min;
  d.attrs["fertility_max"] = profile.soil_fertility.max;
}

}  // namespace

SimConfig sim_config_from_json(const nlohmann::json& j) {
  SimConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw SimError(SimErrc::InvalidArgument, "\"sim\" must be an object");
  auto read = [&](const char* key, double& field) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw SimError(SimErrc::InvalidArgument, std::string(key) + " must be a number");
    field = j[key].get<double>();
  };
  read("ambient_light_rate", c.ambient_light_rate);
  read("daylight_hours", c.daylight_hours);
  read("lamp_light_rate", c.lamp_light_rate);
  read("moisture_decay_rate", c.moisture_decay_rate);
  read("pump_fill_rate", c.pump_fill_rate);
  read("temperature_mean", c.temperature_mean);
  read("temperature_amplitude", c.temperature_amplitude);
  read("fertility_decay_rate", c.fertility_decay_rate);
  read("day_length", c.day_length);
  c.check();
  return c;
}

nlohmann::json to_json(const SimConfig& c) {
  return {{"ambient_light_rate", c.ambient_light_rate},
          {"daylight_hours", c.daylight_hours},
          {"lamp_light_rate", c.lamp_light_rate},
          {"moisture_decay_rate", c.moisture_decay_rate},
          {"pump_fill_rate", c.pump_fill_rate},
          {"temperature_mean", c.temperature_mean},
          {"temperature_amplitude", c.temperature_amplitude},
          {"fertility_decay_rate", c.fertility_decay_rate},
          {"day_length", c.day_length}};
}

Fleet::Fleet(SimConfig config, std::vector<DeviceSetup> devices) : config_(config) {
  config_.check();
  const SpeciesProfile& fallback = default_profile();
  for (auto& setup : devices) {
    if (setup.dev_id.empty()) throw SimError(SimErrc::InvalidArgument, "empty dev_id");
    if (std::any_of(devices_.begin(), devices_.end(),
                    [&](const SimDevice& d) { return d.dev_id == setup.dev_id; })) {
      throw SimError(SimErrc::InvalidArgument, "duplicate dev_id '" + setup.dev_id + "'");
    }
    SimDevice dev;
    dev.dev_id = setup.dev_id;
    dev.type = setup.type;
    dev.powers = setup.powers;
    dev.online = !setup.offline;
    for (const auto& a : device_schema(setup.type)) dev.attrs[a.name] = meta::default_value(a.type);
    switch (setup.type) {
      case DeviceType::PlantMonitor:
        dev.attrs["temperature"] = config_.temperature_mean;
        dev.attrs["soil_moisture"] = 50.0;
        dev.attrs["soil_fertility"] = 1200.0;
        set_ranges(dev, fallback, "");
        break;
      case DeviceType::Recognizer:
        dev.attrs["species"] = fallback.species;
        break;
      case DeviceType::SmartPlug: break;
    }
    devices_.push_back(std::move(dev));
    inject(setup.dev_id, setup.initial);
  }
  for (const auto& d : devices_) {
    if (d.type == DeviceType::Recognizer) {
      const auto& name = std::get<std::string>(d.attrs.at("plant_name"));
      if (!name.empty()) {
        recognize(name);
        break;
      }
    }
  }
}

SimDevice& Fleet::mutable_truth(std::string_view dev_id) {
  auto it = std::find_if(devices_.begin(), devices_.end(),
                         [&](const SimDevice& d) { return d.dev_id == dev_id; });
  if (it == devices_.end()) throw SimError(SimErrc::UnknownDevice, std::string(dev_id));
  return *it;
}

const SimDevice& Fleet::truth(std::string_view dev_id) const {
  return const_cast<Fleet*>(this)->mutable_truth(dev_id);
}

const SimDevice& Fleet::get_state(std::string_view dev_id) const {
  const SimDevice& d = truth(dev_id);
  if (!d.online) throw SimError(SimErrc::DeviceOffline, std::string(dev_id));
  return d;
}

bool Fleet::powered(Powers p) const {
  return std::any_of(devices_.begin(), devices_.end(), [&](const SimDevice& d) {
    return d.type == DeviceType::SmartPlug && d.powers == p && std::get<bool>(d.attrs.at("power"));
  });
}

void Fleet::step(double dt_hours) {
  if (!(dt_hours > 0.0) || !std::isfinite(dt_hours)) {
    throw SimError(SimErrc::InvalidArgument, "dt must be > 0");
  }
  const bool lamp = powered(Powers::Lamp);
  const bool pump = powered(Powers::Pump);
  const double day_len = config_.day_length;

  double remaining = dt_hours;
  while (remaining > 0.0) {
    double seg = std::min(remaining, day_len - time_in_day_);
    const bool daylight = time_in_day_ < config_.daylight_hours;
    if (daylight) seg = std::min(seg, config_.daylight_hours - time_in_day_);
    const double rate = (daylight ? config_.ambient_light_rate : 0.0) +
                        (lamp ? config_.lamp_light_rate : 0.0);
    for (auto& d : devices_) {
      if (d.type != DeviceType::PlantMonitor) continue;
      std::get<double>(d.attrs["accumulated_light"]) += rate * seg;
    }
    time_in_day_ += seg;
    remaining -= seg;
    if (time_in_day_ >= day_len) {
      for (auto& d : devices_) {
        if (d.type != DeviceType::PlantMonitor) continue;
        double& acc = std::get<double>(d.attrs["accumulated_light"]);
        day_totals_.push_back({day_, d.dev_id, acc});
        acc = 0.0;
      }
      ++day_;
      time_in_day_ = 0.0;
    }
  }

  const double t = sim_time();
  const double temperature =
      config_.temperature_mean +
      config_.temperature_amplitude * std::sin(2.0 * std::numbers::pi * t / day_len);
  const double moisture_rate = (pump ? config_.pump_fill_rate : 0.0) - config_.moisture_decay_rate;
  for (auto& d : devices_) {
    if (d.type != DeviceType::PlantMonitor) continue;
    double& moisture = std::get<double>(d.attrs["soil_moisture"]);
    moisture = std::clamp(moisture + moisture_rate * dt_hours, 0.0, 100.0);
    double& fertility = std::get<double>(d.attrs["soil_fertility"]);
    fertility = std::max(0.0, fertility - config_.fertility_decay_rate * dt_hours);
    d.attrs["temperature"] = temperature;
  }
}

const SimDevice& Fleet::set_state(std::string_view dev_id, const meta::AttrMap& patch) {
  SimDevice& d = mutable_truth(dev_id);
  if (!d.online) throw SimError(SimErrc::DeviceOffline, std::string(dev_id));
  meta::AttrMap checked;
  for (const auto& [name, value] : patch) {
    const AttrSchema* entry = schema_entry(d.type, name);
    if (!entry || !entry->writable) {
      throw SimError(SimErrc::ReadOnlyAttribute, d.dev_id + "." + name);
    }
    auto coerced = meta::coerce(value, entry->type);
    if (!coerced) {
      throw SimError(SimErrc::TypeMismatch, d.dev_id + "." + name + " expects " +
                                                meta::type_name(entry->type));
    }
    checked[name] = *coerced;
  }
  for (auto& [name, value] : checked) d.attrs[name] = value;
  if (d.type == DeviceType::Recognizer && checked.count("plant_name")) {
    recognize(std::get<std::string>(checked["plant_name"]));
  }
  return d;
}


void Fleet::apply_profile(const SpeciesProfile& profile, std::string_view plant_name) {
  for (auto& d : devices_) {
    if (d.type == DeviceType::PlantMonitor) set_ranges(d, profile, plant_name);
  }
}

SpeciesProfile Fleet::recognize(std::string_view plant_name) {
  auto it = std::find_if(devices_.begin(), devices_.end(),
                         [](const SimDevice& d) { return d.type == DeviceType::Recognizer; });
  if (it == devices_.end()) throw SimError(SimErrc::NoRecognizer, "fleet has no recognizer");
  SpeciesProfile profile = find_species(plant_name).value_or(default_profile());
  it->attrs["plant_name"] = std::string(plant_name);
  it->attrs["species"] = profile.species;
  apply_profile(profile, plant_name);
  return profile;
}

void Fleet::inject(std::string_view dev_id, const meta::AttrMap& attrs) {
  SimDevice& d = mutable_truth(dev_id);
  meta::AttrMap checked;
  for (const auto& [name, value] : attrs) {
    const AttrSchema* entry = schema_entry(d.type, name);
    if (!entry) throw SimError(SimErrc::InvalidArgument, d.dev_id + " has no attribute " + name);
    auto coerced = meta::coerce(value, entry->type);
    if (!coerced) {
      throw SimError(SimErrc::TypeMismatch, d.dev_id + "." + name + " expects " +
                                                meta::type_name(entry->type));
    }
    checked[name] = *coerced;
  }
  if (auto it = checked.find("soil_moisture"); it != checked.end()) {
    it->second = std::clamp(std::get<double>(it->second), 0.0, 100.0);
  }
  for (auto& [name, value] : checked) d.attrs[name] = value;
}

void Fleet::set_online(std::string_view dev_id, bool online) { mutable_truth(dev_id).online = online; }

void Fleet::rewire(std::string_view dev_id, Powers powers) {
  SimDevice& d = mutable_truth(dev_id);
  if (d.type != DeviceType::SmartPlug) {
    throw SimError(SimErrc::InvalidArgument, d.dev_id + " is not a smart plug");
  }
  d.powers = powers;
}

std::vector<const SimDevice*> Fleet::devices() const {
  std::vector<const SimDevice*> out;
  for (const auto& d : devices_) out.push_back(&d);
  return out;
}

bool operator==(const Fleet& a, const Fleet& b) {
  auto same_config = [](const SimConfig& x, const SimConfig& y) {
    return to_json(x) == to_json(y);
  };
  auto same_device = [](const SimDevice& x, const SimDevice& y) {
    return x.dev_id == y.dev_id && x.type == y.type && x.powers == y.powers &&
           x.online == y.online &&
           std::equal(x.attrs.begin(), x.attrs.end(), y.attrs.begin(), y.attrs.end(),
                      [](const auto& p, const auto& q) {
                        return p.first == q.first && meta::same_value(p.second, q.second);
                      });
  };
  auto same_day = [](const DayRecord& x, const DayRecord& y) {
    return x.day == y.day && x.dev_id == y.dev_id &&
           meta::same_value(x.accumulated_light, y.accumulated_light);
  };
  return same_config(a.config_, b.config_) && a.day_ == b.day_ &&
         meta::same_value(a.time_in_day_, b.time_in_day_) &&
         std::equal(a.devices_.begin(), a.devices_.end(), b.devices_.begin(), b.devices_.end(),
                    same_device) &&
         std::equal(a.day_totals_.begin(), a.day_totals_.end(), b.day_totals_.begin(),
                    b.day_totals_.end(), same_day);
}

FleetSetup fleet_setup_from_json(const nlohmann::json& roster) {
  if (!roster.is_object() || !roster.contains("devices") || !roster["devices"].is_array()) {
    throw SimError(SimErrc::InvalidArgument, "roster needs a \"devices\" array");
  }
  FleetSetup setup;
  setup.config = sim_config_from_json(roster.value("sim", nlohmann::json()));
  for (const auto& entry : roster["devices"]) {
    DeviceSetup dev;
    dev.dev_id = entry.value("dev_id", "");
    auto type = parse_device_type(entry.value("device_type", ""));
    if (!type) {
      throw SimError(SimErrc::InvalidArgument,
                     "device '" + dev.dev_id + "': unknown device_type");
    }
    dev.type = *type;
    if (entry.contains("powers")) {
      auto p = parse_powers(entry["powers"].get<std::string>());
      if (!p) throw SimError(SimErrc::InvalidArgument, "device '" + dev.dev_id + "': bad powers");
      dev.powers = *p;
    }
    dev.offline = entry.value("offline", false);
    if (entry.contains("initial")) {
      for (const auto& [k, v] : entry["initial"].items()) {
        const AttrSchema* s = schema_entry(dev.type, k);
        if (!s) throw SimError(SimErrc::InvalidArgument, dev.dev_id + " has no attribute " + k);
        auto val = meta::value_from_json(v, s->type);
        if (!val) throw SimError(SimErrc::TypeMismatch, dev.dev_id + "." + k);
        dev.initial[k] = *val;
      }
    }
    setup.devices.push_back(std::move(dev));
  }
  return setup;
}

nlohmann::json profile_to_json(const SpeciesProfile& p) {
  auto range = [](const Range& r) { return nlohmann::json{{"min", r.min}, {"max", r.max}}; };
  return {{"species", p.species},
          {"accumulated_light", range(p.accumulated_light)},
          {"temperature", range(p.temperature)},
          {"soil_moisture", range(p.soil_moisture)},
          {"soil_fertility", range(p.soil_fertility)}};
}

}  // namespace rtm::sim
