#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rtm/error.hpp"
#include "rtm/meta/model.hpp"
#include "rtm/sim/species.hpp"

namespace rtm::sim {

enum class DeviceType { PlantMonitor, SmartPlug, Recognizer };

std::string_view to_string(DeviceType t);
std::optional<DeviceType> parse_device_type(std::string_view s);

/// What a smart plug's socket physically feeds.
enum class Powers { None, Lamp, Pump };

std::string_view to_string(Powers p);
std::optional<Powers> parse_powers(std::string_view s);

struct AttrSchema {
  std::string name;
  meta::AttrType type;
  bool writable = false;
};

/// Attributes a device of the given type reports on the wire, in wire order.
const std::vector<AttrSchema>& device_schema(DeviceType t);

enum class SimErrc { UnknownDevice, ReadOnlyAttribute, TypeMismatch, DeviceOffline, NoRecognizer,
                     InvalidArgument };

std::string_view to_string(SimErrc code);

class SimError : public Error {
 public:
  SimError(SimErrc code, const std::string& what)
      : Error(std::string(to_string(code)) + ": " + what), code_(code) {}
  SimErrc code() const noexcept { return code_; }

 private:
  SimErrc code_;
};

/// Simulation constants. Every value is a fixture chosen so the planting
/// demo shows closed-loop behaviour; none is measured data.
struct SimConfig {
  double ambient_light_rate = 150.0;  // lux during the daylight segment
  double daylight_hours = 12.0;       // daylight segment at the start of each day
  double lamp_light_rate = 1000.0;    // lux added while a lamp plug is on
  double moisture_decay_rate = 0.5;   // %/h
  double pump_fill_rate = 6.0;        // %/h while a pump plug is on
  double temperature_mean = 22.0;     // °C
  double temperature_amplitude = 1.5; // °C
  double fertility_decay_rate = 0.5;  // µS/cm per h
  double day_length = 24.0;           // simulated hours

  /// Throws SimError(InvalidArgument) on negative rates or day_length <= 0.
  void check() const;
};

SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimConfig& c);

struct DeviceSetup {
  std::string dev_id;
  DeviceType type = DeviceType::PlantMonitor;
  Powers powers = Powers::None;
  meta::AttrMap initial;  // overrides of the type defaults
  bool offline = false;
};

/// Ground truth of one simulated device. `online == false` simulates loss of
/// connectivity: the wire answers 503 while the physics keep running.
struct SimDevice {
  std::string dev_id;
  DeviceType type = DeviceType::PlantMonitor;
  Powers powers = Powers::None;
  meta::AttrMap attrs;
  bool online = true;
};

struct DayRecord {
  std::int64_t day = 0;
  std::string dev_id;
  double accumulated_light = 0.0;  // value reached at the day boundary
};

/// Deterministic device fleet. Time only moves through step().
class Fleet {
 public:
  Fleet(SimConfig config, std::vector<DeviceSetup> devices);

  /// Advances simulated time by `dt_hours` (> 0), splitting the interval at
  /// daylight and day boundaries.
  void step(double dt_hours);

  /// Wire view: throws UnknownDevice, or DeviceOffline when the device is
  /// simulating loss.
  const SimDevice& get_state(std::string_view dev_id) const;

  /// Applies a patch of writable attributes atomically. Setting a
  /// recognizer's plant_name runs recognize().
  const SimDevice& set_state(std::string_view dev_id, const meta::AttrMap& patch);

  /// Looks the name up, stores it on the recognizer and pushes the profile's
  /// ranges to every plant monitor. Unknown names yield the default profile.
  SpeciesProfile recognize(std::string_view plant_name);

  /// Truth regardless of connectivity.
  const SimDevice& truth(std::string_view dev_id) const;

  /// Scripting hook: overwrites any attributes, bypassing writability.
  void inject(std::string_view dev_id, const meta::AttrMap& attrs);
  void set_online(std::string_view dev_id, bool online);
  void rewire(std::string_view dev_id, Powers powers);

  std::vector<const SimDevice*> devices() const;
  const SimConfig& config() const { return config_; }
  double sim_time() const { return static_cast<double>(day_) * config_.day_length + time_in_day_; }
  std::int64_t day() const { return day_; }
  double time_in_day() const { return time_in_day_; }
  const std::vector<DayRecord>& day_totals() const { return day_totals_; }

  friend bool operator==(const Fleet& a, const Fleet& b);

 private:
  SimDevice& mutable_truth(std::string_view dev_id);
  bool powered(Powers p) const;
  void apply_profile(const SpeciesProfile& profile, std::string_view plant_name);

  SimConfig config_;
  std::vector<SimDevice> devices_;
  std::int64_t day_ = 0;
  double time_in_day_ = 0.0;
  std::vector<DayRecord> day_totals_;
};

/// Roster document: {"sim": {...}, "devices": [{"dev_id", "device_type",
/// "powers"?, "initial"?, "offline"?, ...}]}. Keys used only by the device
/// connector are ignored here.
struct FleetSetup {
  SimConfig config;
  std::vector<DeviceSetup> devices;
};

FleetSetup fleet_setup_from_json(const nlohmann::json& roster);

nlohmann::json profile_to_json(const SpeciesProfile& p);

}  // namespace rtm::sim
