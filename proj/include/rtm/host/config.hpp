#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtm/diagnostic.hpp"
#include "rtm/error.hpp"
#include "rtm/mapping/rules.hpp"
#include "rtm/runtime/layout.hpp"
#include "rtm/scenario/definition.hpp"
#include "rtm/sim/fleet.hpp"

namespace rtm::host {

/// Process exit codes shared by every rtmctl command.
enum ExitCode : int { kExitOk = 0, kExitIo = 1, kExitValidation = 2 };

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;

  std::string url() const { return "http://" + host + ":" + std::to_string(port); }
};

/// Parses "host:port" or ":port".
std::optional<Endpoint> parse_endpoint(std::string_view text);

/// Host configuration. Document paths in a config file are relative to the
/// file's directory.
struct HostConfig {
  std::filesystem::path roster;
  std::filesystem::path rules;
  std::filesystem::path scenario;
  int tick_ms = 1000;
  double sim_hours_per_tick = 0.25;
  Endpoint api_listen{"127.0.0.1", 8080};
  Endpoint sim_listen{"127.0.0.1", 8081};
  bool embed_simulator = true;
  bool test_mode = false;  // ticks only through POST /api/tick; simulator test endpoints on
};

enum class ConfigErrc { Io, Invalid };

class ConfigError : public Error {
 public:
  ConfigError(ConfigErrc code, const std::string& what) : Error(what), code_(code) {}
  ConfigErrc code() const noexcept { return code_; }

 private:
  ConfigErrc code_;
};

/// Reads and checks a config file. Throws ConfigError.
HostConfig load_host_config(const std::filesystem::path& file);

/// Applies keys of a JSON object onto `cfg`; relative paths resolve against
/// `base`. Throws ConfigError(Invalid).
void apply_config_json(HostConfig& cfg, const nlohmann::json& j, const std::filesystem::path& base);

/// Throws ConfigError(Invalid) for tick_ms <= 0, sim_hours_per_tick <= 0 or
/// missing document paths.
void check_config(const HostConfig& cfg);

/// The three documents of a deployment, parsed.
struct Documents {
  nlohmann::json roster;
  std::vector<runtime::DeviceDescriptor> descriptors;
  sim::FleetSetup fleet;
  mapping::RuleSet rules;
  scenario::ScenarioDef scenario;
  std::string rules_text;
};

struct LoadOutcome {
  std::optional<Documents> documents;  // set when every document parsed
  std::vector<Diagnostic> diagnostics;
  bool io_failure = false;

  int exit_code() const;
};

std::optional<std::string> read_file(const std::filesystem::path& p);

/// Reads and parses the three documents. Parse problems become located
/// diagnostics; unreadable files set io_failure.
LoadOutcome load_documents(const std::filesystem::path& roster, const std::filesystem::path& rules,
                           const std::filesystem::path& scenario);

/// Cross-document checks: rules against both metamodels, the scenario
/// definition, and a dry run that projects the roster's initial device
/// states through the rules and checks the scenario's cardinality bounds.
std::vector<Diagnostic> validate_documents(const Documents& docs);

/// Full `validate` command: load_documents then validate_documents.
LoadOutcome validate_paths(const std::filesystem::path& roster, const std::filesystem::path& rules,
                           const std::filesystem::path& scenario);

nlohmann::json to_json(const Diagnostic& d);

}  // namespace rtm::host
