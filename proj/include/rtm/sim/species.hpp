#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rtm::sim {

struct Range {
  double min = 0.0;
  double max = 0.0;

  bool contains(double v) const { return v >= min && v <= max; }
  double width() const { return max - min; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Suitable living conditions for one species. Light is lux·h per simulated
/// day, temperature °C, soil moisture %, soil fertility µS/cm.
struct SpeciesProfile {
  std::string species;
  Range accumulated_light;
  Range temperature;
  Range soil_moisture;
  Range soil_fertility;

  friend bool operator==(const SpeciesProfile&, const SpeciesProfile&) = default;
};

/// Bundled species fixtures. Values are illustrative, not measured data.
const std::vector<SpeciesProfile>& species_table();

/// Case-insensitive lookup on the trimmed name.
std::optional<SpeciesProfile> find_species(std::string_view plant_name);

/// Profile used when the name is not in the table; its species is "unknown".
const SpeciesProfile& default_profile();

}  // namespace rtm::sim
