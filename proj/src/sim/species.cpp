#include "rtm/sim/species.hpp"

#include <algorithm>
#include <cctype>

namespace rtm::sim {

const std::vector<SpeciesProfile>& species_table() {
  static const std::vector<SpeciesProfile> table = {
      {"monstera", {3000, 9000}, {12, 32}, {25, 60}, {350, 2000}},
      {"basil", {5000, 15000}, {15, 30}, {30, 65}, {350, 2000}},
      {"cactus", {4000, 20000}, {10, 35}, {5, 25}, {100, 800}},
      {"fern", {1000, 5000}, {12, 28}, {40, 75}, {200, 1500}},
      {"orchid", {2000, 8000}, {16, 30}, {30, 60}, {150, 1000}},
  };
  return table;
}

const SpeciesProfile& default_profile() {
  static const SpeciesProfile profile{"unknown", {2500, 10000}, {10, 32}, {20, 60}, {200, 2000}};
  return profile;
}

std::optional<SpeciesProfile> find_species(std::string_view plant_name) {
  auto first = plant_name.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return std::nullopt;
  auto last = plant_name.find_last_not_of(" \t\r\n");
  std::string key;
  for (char c : plant_name.substr(first, last - first + 1)) {
    key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  const auto& table = species_table();
  auto it = std::find_if(table.begin(), table.end(),
                         [&](const SpeciesProfile& p) { return p.species == key; });
  if (it == table.end()) return std::nullopt;
  return *it;
}

}  // namespace rtm::sim
