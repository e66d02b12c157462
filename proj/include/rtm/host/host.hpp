#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtm/host/config.hpp"
#include "rtm/runtime/connector.hpp"
#include "rtm/scenario/engine.hpp"
#include "rtm/sim/service.hpp"
#include "rtm/sync/synchronizer.hpp"

namespace rtm::host {

/// Phases of one tick, in execution order.
enum class Phase { SimStep, Poll, SyncToScenario, Behavior, SyncToRuntime };

std::string_view to_string(Phase p);

enum class HostErrc { Startup, NotFound, InvalidRequest, Rejected, TestModeOnly };

class HostError : public Error {
 public:
  HostError(HostErrc code, const std::string& what, std::vector<Diagnostic> diags = {})
      : Error(what), code_(code), diags_(std::move(diags)) {}
  HostErrc code() const noexcept { return code_; }
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diags_; }

 private:
  HostErrc code_;
  std::vector<Diagnostic> diags_;
};

using TransportFactory =
    std::function<std::shared_ptr<runtime::DeviceTransport>(const runtime::DeviceDescriptor&)>;

struct TickReport {
  std::uint64_t tick = 0;
  double sim_time = 0.0;
  std::size_t runtime_events = 0;
  std::size_t scenario_events = 0;
  std::size_t writes = 0;
  std::vector<scenario::Notification> notifications;
};

struct RulesReload {
  bool changed = false;
  std::uint64_t version = 0;
};

/// The running system of one deployment: simulator (when embedded), runtime
/// model, connector, synchronizer and scenario engine. Not thread-safe; the
/// event loop is its only caller in a served process.
///
/// One tick runs: simulator step (embedded only), poll of due devices,
/// runtime-to-scenario sync, behavior step, scenario-to-runtime sync.
class Host {
 public:
  using PhaseObserver = std::function<void(std::uint64_t tick, Phase phase)>;
  using EventSink = std::function<void(const nlohmann::json& message)>;

  /// Builds everything, polls each device once and projects the runtime
  /// model. Throws HostError(Startup) with diagnostics when the documents do
  /// not validate or the projected scenario violates its bounds.
  /// `transports` defaults to the embedded simulator and is required when
  /// the simulator is not embedded.
  Host(HostConfig config, Documents docs, TransportFactory transports = {});

  TickReport tick();

  /// Console operations. Each one syncs its scenario change to the devices
  /// before returning.
  std::vector<meta::ChangeEvent> set_plant_name(const std::string& name);
  nlohmann::json set_actuator(const std::string& element_id, bool on);

  /// Parses, validates and activates a mapping document. An equivalent rule
  /// set keeps the active version. Throws HostError(Rejected) with
  /// diagnostics.
  RulesReload reload_rules(const std::string& xml);

  nlohmann::json scenario_json() const;
  nlohmann::json runtime_json() const;
  nlohmann::json notifications_json() const;
  nlohmann::json diagnostics_json() const;

  void set_phase_observer(PhaseObserver fn) { phase_observer_ = std::move(fn); }
  void set_event_sink(EventSink fn) { sink_ = std::move(fn); }

  const HostConfig& config() const { return config_; }
  std::uint64_t ticks() const { return tick_; }
  double sim_time() const;
  const meta::Model& runtime_model() const { return runtime_; }
  const meta::Model& scenario_model() const { return *scenario_; }
  sync::Synchronizer& synchronizer() { return *sync_; }
  scenario::ScenarioEngine& engine() { return *engine_; }
  runtime::DeviceConnector& connector() { return connector_; }
  const std::vector<scenario::Notification>& notifications() const { return notifications_; }
  const std::deque<Diagnostic>& diagnostics() const { return diagnostics_; }

  /// Embedded simulator; null in external mode.
  const std::shared_ptr<sim::SimService>& simulator() const { return sim_; }

 private:
  void phase(Phase p);
  void record(const std::vector<Diagnostic>& diags);
  void publish(const std::vector<meta::ChangeEvent>& events);
  void publish(const scenario::Notification& n);
  sync::SyncResult write_back(const std::vector<meta::ChangeEvent>& scenario_events);

  HostConfig config_;
  Documents docs_;
  std::shared_ptr<sim::SimService> sim_;
  meta::Model runtime_;
  std::unique_ptr<meta::Model> scenario_;
  runtime::DeviceConnector connector_;
  std::unique_ptr<scenario::ScenarioEngine> engine_;
  std::unique_ptr<sync::Synchronizer> sync_;
  std::uint64_t tick_ = 0;
  std::vector<scenario::Notification> notifications_;
  std::deque<Diagnostic> diagnostics_;
  PhaseObserver phase_observer_;
  EventSink sink_;
};

nlohmann::json to_json(const scenario::Notification& n);

}  // namespace rtm::host
