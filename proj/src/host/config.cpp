#include "rtm/host/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace rtm::host {

namespace fs = std::filesystem;

std::optional<Endpoint> parse_endpoint(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos) return std::nullopt;
  Endpoint e;
  if (colon > 0) e.host = std::string(text.substr(0, colon));
  auto port = text.substr(colon + 1);
  auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), e.port);
  if (ec != std::errc() || p != port.data() + port.size() || e.port < 0 || e.port > 65535) {
    return std::nullopt;
  }
  return e;
}

std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return ss.str();
}

void apply_config_json(HostConfig& cfg, const nlohmann::json& j, const fs::path& base) {
  if (!j.is_object()) throw ConfigError(ConfigErrc::Invalid, "config must be a JSON object");
  auto path = [&](const nlohmann::json& v, const char* key) {
    if (!v.is_string()) throw ConfigError(ConfigErrc::Invalid, std::string(key) + " must be a path string");
    fs::path p = v.get<std::string>();
    return p.is_absolute() ? p : (base / p).lexically_normal();
  };
  auto endpoint = [&](const nlohmann::json& v, const char* key) {
    auto e = v.is_string() ? parse_endpoint(v.get<std::string>()) : std::nullopt;
    if (!e) throw ConfigError(ConfigErrc::Invalid, std::string(key) + " must be \"host:port\"");
    return *e;
  };
  auto boolean = [&](const nlohmann::json& v, const char* key) {
    if (!v.is_boolean()) throw ConfigError(ConfigErrc::Invalid, std::string(key) + " must be a boolean");
    return v.get<bool>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "roster") cfg.roster = path(v, "roster");
    else if (key == "rules") cfg.rules = path(v, "rules");
    else if (key == "scenario") cfg.scenario = path(v, "scenario");
    else if (key == "tick_ms") {
      if (!v.is_number_integer()) throw ConfigError(ConfigErrc::Invalid, "tick_ms must be an integer");
      cfg.tick_ms = v.get<int>();
    } else if (key == "sim_hours_per_tick") {
      if (!v.is_number()) throw ConfigError(ConfigErrc::Invalid, "sim_hours_per_tick must be a number");
      cfg.sim_hours_per_tick = v.get<double>();
    } else if (key == "api_listen") cfg.api_listen = endpoint(v, "api_listen");
    else if (key == "sim_listen") cfg.sim_listen = endpoint(v, "sim_listen");
    else if (key == "embed_simulator") cfg.embed_simulator = boolean(v, "embed_simulator");
    else if (key == "test_mode") cfg.test_mode = boolean(v, "test_mode");
    else throw ConfigError(ConfigErrc::Invalid, "unknown config key '" + key + "'");
  }
}

void check_config(const HostConfig& cfg) {
  if (cfg.tick_ms <= 0) throw ConfigError(ConfigErrc::Invalid, "tick_ms must be > 0");
  if (!(cfg.sim_hours_per_tick > 0.0)) {
    throw ConfigError(ConfigErrc::Invalid, "sim_hours_per_tick must be > 0");
  }
  if (cfg.roster.empty() || cfg.rules.empty() || cfg.scenario.empty()) {
    throw ConfigError(ConfigErrc::Invalid, "roster, rules and scenario paths are required");
  }
}

HostConfig load_host_config(const fs::path& file) {
  auto text = read_file(file);
  if (!text) throw ConfigError(ConfigErrc::Io, "cannot read " + file.string());
  auto j = nlohmann::json::parse(*text, nullptr, false);
  if (j.is_discarded()) throw ConfigError(ConfigErrc::Invalid, file.string() + ": not valid JSON");
  HostConfig cfg;
  apply_config_json(cfg, j, file.parent_path());
  check_config(cfg);
  return cfg;
}

int LoadOutcome::exit_code() const {
  if (io_failure) return kExitIo;
  return diagnostics.empty() ? kExitOk : kExitValidation;
}

namespace {

SourceLocation json_location(const std::string& file, const std::string& text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {file, line, col, {}};
}

}  // namespace

LoadOutcome load_documents(const fs::path& roster, const fs::path& rules, const fs::path& scenario) {
  LoadOutcome out;
  auto read = [&](const fs::path& p) {
    auto text = read_file(p);
    if (!text) {
      out.io_failure = true;
      out.diagnostics.push_back({Severity::Error, {p.string(), 0, 0, {}}, {}, "cannot read file"});
    }
    return text;
  };
  auto roster_text = read(roster);
  auto rules_text = read(rules);
  auto scenario_text = read(scenario);
  if (out.io_failure) return out;

  Documents docs;
  bool ok = true;
  try {
    docs.roster = nlohmann::json::parse(*roster_text);
    const std::size_t before = out.diagnostics.size();
    docs.descriptors = runtime::descriptors_from_json(docs.roster, roster.string(), out.diagnostics);
    if (out.diagnostics.size() == before) {
      try {
        docs.fleet = sim::fleet_setup_from_json(docs.roster);
      } catch (const sim::SimError& e) {
        out.diagnostics.push_back({Severity::Error, {roster.string(), 0, 0, "/"}, {}, e.what()});
      }
    }
    ok = out.diagnostics.size() == before;
  } catch (const nlohmann::json::parse_error& e) {
    out.diagnostics.push_back({Severity::Error, json_location(roster.string(), *roster_text, e.byte), {},
                               "malformed JSON"});
    ok = false;
  }
  try {
    docs.rules = mapping::parse_rules(*rules_text, rules.string());
    docs.rules_text = *rules_text;
  } catch (const mapping::RuleParseError& e) {
    out.diagnostics.push_back(e.diagnostic());
    ok = false;
  }
  try {
    docs.scenario = scenario::parse_scenario(*scenario_text, scenario.string());
  } catch (const scenario::ScenarioError& e) {
    out.diagnostics.insert(out.diagnostics.end(), e.diagnostics().begin(), e.diagnostics().end());
    ok = false;
  }
  if (ok) out.documents = std::move(docs);
  return out;
}

nlohmann::json to_json(const Diagnostic& d) {
  nlohmann::json j;
  j["severity"] = d.severity == Severity::Error ? "error" : "warning";
  j["file"] = d.where.file;
  j["line"] = d.where.line;
  j["column"] = d.where.column;
  if (!d.where.pointer.empty()) j["pointer"] = d.where.pointer;
  j["subject"] = d.subject;
  j["message"] = d.message;
  return j;
}

LoadOutcome validate_paths(const fs::path& roster, const fs::path& rules, const fs::path& scenario) {
  LoadOutcome out = load_documents(roster, rules, scenario);
  if (out.documents) {
    auto more = validate_documents(*out.documents);
    out.diagnostics.insert(out.diagnostics.end(), more.begin(), more.end());
  }
  return out;
}

}  // namespace rtm::host
