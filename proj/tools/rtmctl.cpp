// rtmctl: host process and tooling for the runtime-model framework.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <thread>

#include "rtm/host/config.hpp"
#include "rtm/host/event_loop.hpp"
#include "rtm/host/host.hpp"
#include "rtm/net/http.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

void wait_for_signal() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

void print(const std::vector<rtm::Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << d.format() << '\n';
}

struct ServeOptions {
  std::string config;
  std::optional<int> tick_ms;
  std::optional<double> sim_hours;
  std::string listen;
  std::string sim_listen;
  bool test_mode = false;
  bool external = false;
};

int serve(const ServeOptions& o) {
  using namespace rtm::host;
  HostConfig cfg;
  auto text = read_file(o.config);
  if (!text) {
    std::cerr << "error: cannot read " << o.config << '\n';
    return kExitIo;
  }
  try {
    auto j = nlohmann::json::parse(*text, nullptr, false);
    if (j.is_discarded()) throw ConfigError(ConfigErrc::Invalid, o.config + ": not valid JSON");
    // Flags override file keys, so the file is checked only after both.
    apply_config_json(cfg, j, std::filesystem::path(o.config).parent_path());
    if (o.tick_ms) cfg.tick_ms = *o.tick_ms;
    if (o.sim_hours) cfg.sim_hours_per_tick = *o.sim_hours;
    if (!o.listen.empty()) {
      auto e = parse_endpoint(o.listen);
      if (!e) throw ConfigError(ConfigErrc::Invalid, "--listen must be host:port");
      cfg.api_listen = *e;
    }
    if (!o.sim_listen.empty()) {
      auto e = parse_endpoint(o.sim_listen);
      if (!e) throw ConfigError(ConfigErrc::Invalid, "--sim-listen must be host:port");
      cfg.sim_listen = *e;
    }
    if (o.test_mode) cfg.test_mode = true;
    if (o.external) cfg.embed_simulator = false;
    check_config(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitValidation;
  }

  LoadOutcome loaded = validate_paths(cfg.roster, cfg.rules, cfg.scenario);
  if (loaded.exit_code() != kExitOk) {
    print(loaded.diagnostics);
    return loaded.exit_code();
  }

  std::unique_ptr<Host> host;
  try {
    TransportFactory transports;
    if (!cfg.embed_simulator) transports = rtm::net::http_transports(cfg.sim_listen.url());
    host = std::make_unique<Host>(cfg, std::move(*loaded.documents), transports);
  } catch (const HostError& e) {
    print(e.diagnostics());
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  EventLoop loop(std::move(host), !cfg.test_mode);
  rtm::net::ApiServer api(loop, cfg.test_mode);
  loop.call([&](Host& h) { h.set_event_sink(api.sink()); });
  int port = 0;
  try {
    port = api.start(cfg.api_listen);
  } catch (const rtm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  std::cout << "api listening on http://" << cfg.api_listen.host << ":" << port << std::endl;
  wait_for_signal();
  api.stop();
  loop.stop();
  return kExitOk;
}

struct SimulateOptions {
  std::string roster;
  std::string listen = "127.0.0.1:8081";
  int tick_ms = 1000;
  double sim_hours = 0.25;
  bool test_mode = false;
};

int simulate(const SimulateOptions& o) {
  using namespace rtm;
  auto text = host::read_file(o.roster);
  if (!text) {
    std::cerr << "error: cannot read " << o.roster << '\n';
    return host::kExitIo;
  }
  auto at = host::parse_endpoint(o.listen);
  if (!at || o.tick_ms <= 0 || !(o.sim_hours > 0.0)) {
    std::cerr << "config error: bad --listen, --tick-ms or --sim-hours-per-tick\n";
    return host::kExitValidation;
  }
  std::shared_ptr<sim::SimService> service;
  try {
    auto setup = sim::fleet_setup_from_json(nlohmann::json::parse(*text));
    service = std::make_shared<sim::SimService>(sim::Fleet(setup.config, setup.devices), o.test_mode);
  } catch (const std::exception& e) {
    std::cerr << "error: " << o.roster << ": " << e.what() << '\n';
    return host::kExitValidation;
  }
  net::SimServer server(service);
  int port = 0;
  try {
    port = server.start(*at);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return host::kExitIo;
  }
  std::cout << "simulator listening on http://" << at->host << ":" << port << std::endl;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  auto next = std::chrono::steady_clock::now();
  while (!g_stop) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (o.test_mode) continue;
    if (std::chrono::steady_clock::now() < next) continue;
    next += std::chrono::milliseconds(o.tick_ms);
    service->with_fleet([&](sim::Fleet& f) { f.step(o.sim_hours); });
  }
  server.stop();
  return host::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runtime-model host for simulated smart-home devices"};
  app.require_subcommand(1);

  ServeOptions serve_opts;
  auto* serve_cmd = app.add_subcommand("serve", "Run the tick loop and the /api/ server");
  serve_cmd->add_option("--config", serve_opts.config, "Host config JSON")->required();
  serve_cmd->add_option("--tick-ms", serve_opts.tick_ms, "Wall milliseconds per tick");
  serve_cmd->add_option("--sim-hours-per-tick", serve_opts.sim_hours, "Simulated hours per tick");
  serve_cmd->add_option("--listen", serve_opts.listen, "API address host:port");
  serve_cmd->add_option("--sim-listen", serve_opts.sim_listen, "External simulator address host:port");
  serve_cmd->add_flag("--test-mode", serve_opts.test_mode, "Tick only through POST /api/tick");
  serve_cmd->add_flag("--external", serve_opts.external, "Reach devices over HTTP instead of embedding");

  std::vector<std::string> paths;
  auto* validate_cmd = app.add_subcommand("validate", "Check roster, rules and scenario documents");
  validate_cmd->add_option("documents", paths, "<roster> <rules> <scenario>")->required()->expected(3);

  SimulateOptions sim_opts;
  auto* sim_cmd = app.add_subcommand("simulate", "Serve the simulated device fleet over HTTP");
  sim_cmd->add_option("--roster", sim_opts.roster, "Device roster JSON")->required();
  sim_cmd->add_option("--listen", sim_opts.listen, "Address host:port");
  sim_cmd->add_option("--tick-ms", sim_opts.tick_ms, "Wall milliseconds per simulator step");
  sim_cmd->add_option("--sim-hours-per-tick", sim_opts.sim_hours, "Simulated hours per step");
  sim_cmd->add_flag("--test-mode", sim_opts.test_mode, "Step only through POST /sim/step");

  app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? rtm::host::kExitOk : rtm::host::kExitValidation;
  }

  if (*serve_cmd) return serve(serve_opts);
  if (*sim_cmd) return simulate(sim_opts);
  if (*validate_cmd) {
    auto out = rtm::host::validate_paths(paths[0], paths[1], paths[2]);
    print(out.diagnostics);
    if (out.exit_code() == rtm::host::kExitOk) std::cout << "ok\n";
    return out.exit_code();
  }
  std::cout << "rtmctl " << kVersion << '\n';
  return rtm::host::kExitOk;
}
