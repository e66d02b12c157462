#include "rtm/host/host.hpp"

#include "rtm/meta/json.hpp"

namespace rtm::host {

using meta::ChangeEvent;

namespace {

constexpr std::size_t kDiagnosticLog = 500;

[[noreturn]] void startup_failure(std::vector<Diagnostic> diags) {
  std::string what = "startup validation failed";
  if (!diags.empty()) what += ": " + diags.front().format();
  throw HostError(HostErrc::Startup, what, std::move(diags));
}

}  // namespace

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::SimStep: return "sim_step";
    case Phase::Poll: return "poll";
    case Phase::SyncToScenario: return "sync_to_scenario";
    case Phase::Behavior: return "behavior";
    case Phase::SyncToRuntime: return "sync_to_runtime";
  }
  return "?";
}

nlohmann::json to_json(const scenario::Notification& n) {
  return {{"sim_time", n.sim_time},
          {"severity", scenario::to_string(n.severity)},
          {"message", n.message},
          {"rule", n.rule_id}};
}

Host::Host(HostConfig config, Documents docs, TransportFactory transports)
    : config_(std::move(config)),
      docs_(std::move(docs)),
      runtime_(runtime::runtime_metamodel(), meta::ModelTag::Runtime),
      connector_(runtime_) {
  std::vector<Diagnostic> diags = mapping::validate(docs_.rules, *runtime::runtime_metamodel(),
                                                    *docs_.scenario.metamodel);
  auto scenario_diags = scenario::validate(docs_.scenario);
  diags.insert(diags.end(), scenario_diags.begin(), scenario_diags.end());
  if (has_errors(diags)) startup_failure(std::move(diags));

  if (config_.embed_simulator) {
    try {
      sim_ = std::make_shared<sim::SimService>(sim::Fleet(docs_.fleet.config, docs_.fleet.devices),
                                               config_.test_mode);
    } catch (const sim::SimError& e) {
      startup_failure({{Severity::Error, {}, "simulator", e.what()}});
    }
  }
  if (!transports) {
    if (!sim_) startup_failure({{Severity::Error, {}, "host", "no device transport configured"}});
    transports = [sim = sim_](const runtime::DeviceDescriptor&) {
      return std::make_shared<runtime::InProcessTransport>(sim);
    };
  }
  for (const auto& d : docs_.descriptors) {
    try {
      connector_.register_device(d, transports(d));
    } catch (const runtime::RuntimeError& e) {
      startup_failure({{Severity::Error, {}, d.dev_id, e.what()}});
    }
  }

  scenario_ = std::make_unique<meta::Model>(docs_.scenario.metamodel, meta::ModelTag::Scenario);
  try {
    engine_ = std::make_unique<scenario::ScenarioEngine>(docs_.scenario, *scenario_);
  } catch (const scenario::ScenarioError& e) {
    startup_failure(e.diagnostics());
  }
  sync_ = std::make_unique<sync::Synchronizer>(runtime_, *scenario_, connector_);

  for (const auto& id : connector_.device_ids()) connector_.poll_once(id);
  try {
    record(sync_->reload_rules(docs_.rules).diagnostics);
  } catch (const sync::ValidationFailed& e) {
    startup_failure(e.diagnostics());
  }
  if (auto card = scenario::check_cardinality(docs_.scenario, *scenario_); !card.empty()) {
    startup_failure(std::move(card));
  }
}

double Host::sim_time() const {
  if (sim_) return sim_->with_fleet([](const sim::Fleet& f) { return f.sim_time(); });
  return static_cast<double>(tick_) * config_.sim_hours_per_tick;
}

void Host::phase(Phase p) {
  if (phase_observer_) phase_observer_(tick_, p);
}

void Host::record(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    diagnostics_.push_back(d);
    if (diagnostics_.size() > kDiagnosticLog) diagnostics_.pop_front();
  }
}

void Host::publish(const std::vector<ChangeEvent>& events) {
  if (!sink_) return;
  for (const auto& ev : events) sink_({{"type", "change"}, {"event", meta::to_json(ev)}});
}

void Host::publish(const scenario::Notification& n) {
  if (sink_) sink_({{"type", "notification"}, {"notification", to_json(n)}});
}

sync::SyncResult Host::write_back(const std::vector<ChangeEvent>& scenario_events) {
  auto r = sync_->sync_scenario_to_runtime(scenario_events);
  publish(r.runtime_events);
  publish(r.scenario_events);
  record(r.diagnostics);
  return r;
}

TickReport Host::tick() {
  ++tick_;
  TickReport rep;
  rep.tick = tick_;

  phase(Phase::SimStep);
  if (sim_) sim_->with_fleet([&](sim::Fleet& f) { f.step(config_.sim_hours_per_tick); });

  phase(Phase::Poll);
  auto polled = connector_.poll_due();
  publish(polled);
  rep.runtime_events = polled.size();

  phase(Phase::SyncToScenario);
  sync_->enqueue(polled);
  auto to_scenario = sync_->process_pending();
  if (sync_->resync_pending()) to_scenario.merge(sync_->full_resync());
  publish(to_scenario.scenario_events);
  record(to_scenario.diagnostics);
  rep.scenario_events = to_scenario.scenario_events.size();

  phase(Phase::Behavior);
  auto behavior = engine_->step_behavior(sim_time());
  publish(behavior.events);
  record(behavior.diagnostics);
  for (const auto& n : behavior.notifications) {
    notifications_.push_back(n);
    publish(n);
  }
  rep.scenario_events += behavior.events.size();
  rep.notifications = std::move(behavior.notifications);

  phase(Phase::SyncToRuntime);
  auto to_runtime = write_back(behavior.events);
  rep.writes = to_runtime.writes.size();
  rep.runtime_events += to_runtime.runtime_events.size();
  rep.scenario_events += to_runtime.scenario_events.size();
  rep.sim_time = sim_time();
  return rep;
}

std::vector<ChangeEvent> Host::set_plant_name(const std::string& name) {
  std::vector<ChangeEvent> events;
  try {
    events = engine_->set_plant_name(name);
  } catch (const scenario::ScenarioError& e) {
    throw HostError(HostErrc::NotFound, e.what());
  }
  publish(events);
  write_back(events);
  return events;
}

nlohmann::json Host::set_actuator(const std::string& element_id, bool on) {
  const meta::ModelElement* el = scenario_->find(element_id);
  if (!el) throw HostError(HostErrc::NotFound, "no scenario element '" + element_id + "'");
  const meta::AttributeDef* attr = scenario_->metamodel().at(el->class_name).attribute("on");
  if (!attr || attr->type.kind != meta::ValueKind::Bool || !attr->writable) {
    throw HostError(HostErrc::InvalidRequest, element_id + " has no writable Bool attribute 'on'");
  }
  auto events = engine_->console_set(element_id, "on", on);
  publish(events);
  write_back(events);
  return meta::to_json(scenario_->at(element_id));
}

RulesReload Host::reload_rules(const std::string& xml) {
  mapping::RuleSet parsed;
  try {
    parsed = mapping::parse_rules(xml, "rules");
  } catch (const mapping::RuleParseError& e) {
    throw HostError(HostErrc::Rejected, e.what(), {e.diagnostic()});
  }
  if (mapping::equivalent(parsed, sync_->rules())) return {false, sync_->version()};
  try {
    auto r = sync_->reload_rules(std::move(parsed));
    publish(r.scenario_events);
    record(r.diagnostics);
  } catch (const sync::ValidationFailed& e) {
    throw HostError(HostErrc::Rejected, e.what(), e.diagnostics());
  }
  docs_.rules_text = xml;
  return {true, sync_->version()};
}

nlohmann::json Host::scenario_json() const {
  nlohmann::json j = meta::to_json(*scenario_);
  j["rules_version"] = sync_->version();
  j["tick"] = tick_;
  j["sim_time"] = sim_time();
  nlohmann::json bindings = nlohmann::json::array();
  for (const auto& b : sync_->bindings()) {
    bindings.push_back({{"rule", b.rule_id}, {"runtime", b.runtime_id}, {"scenario", b.scenario_id}});
  }
  j["bindings"] = std::move(bindings);
  nlohmann::json machines = nlohmann::json::object();
  for (const auto& m : engine_->definition().machines) machines[m.id] = engine_->state(m.id);
  j["machines"] = std::move(machines);
  return j;
}

nlohmann::json Host::runtime_json() const {
  nlohmann::json j = meta::to_json(runtime_);
  j["tick"] = tick_;
  j["sim_time"] = sim_time();
  return j;
}

nlohmann::json Host::notifications_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& n : notifications_) list.push_back(to_json(n));
  return {{"notifications", std::move(list)}};
}

nlohmann::json Host::diagnostics_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& d : diagnostics_) list.push_back(to_json(d));
  return {{"rules_version", sync_->version()}, {"diagnostics", std::move(list)}};
}

std::vector<Diagnostic> validate_documents(const Documents& docs) {
  HostConfig cfg;
  cfg.embed_simulator = true;
  cfg.test_mode = true;
  try {
    Host dry_run(cfg, docs);
    return {dry_run.diagnostics().begin(), dry_run.diagnostics().end()};
  } catch (const HostError& e) {
    if (!e.diagnostics().empty()) return e.diagnostics();
    return {{Severity::Error, {}, {}, e.what()}};
  }
}

}  // namespace rtm::host
