#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rtm/expr/parser.hpp"
#include "rtm/host/config.hpp"
#include "rtm/sync/synchronizer.hpp"
#include "sync_world.hpp"

using namespace rtm;
using meta::ChangeEvent;
using meta::Origin;
using meta::Value;

namespace {

// Fixture deployment without the scenario engine: simulator, connector,
// synchronizer and a recording writer in front of the connector.
struct Planting {
  host::Documents docs;
  std::shared_ptr<sim::SimService> service;
  meta::Model runtime{runtime::runtime_metamodel(), meta::ModelTag::Runtime};
  runtime::DeviceConnector connector{runtime};
  std::unique_ptr<meta::Model> scenario;
  oracle::RecordingWriter writer{&connector};
  std::unique_ptr<sync::Synchronizer> sync;

  Planting() {
    auto loaded = host::load_documents(testing::fixture("planting/roster.json"),
                                       testing::fixture("planting/rules.xml"),
                                       testing::fixture("planting/scenario.xml"));
    REQUIRE(loaded.documents);
    docs = std::move(*loaded.documents);
    service = std::make_shared<sim::SimService>(sim::Fleet(docs.fleet.config, docs.fleet.devices), true);
    auto transport = std::make_shared<runtime::InProcessTransport>(service);
    for (const auto& d : docs.descriptors) connector.register_device(d, transport);
    for (const auto& id : connector.device_ids()) connector.poll_once(id);
    scenario = std::make_unique<meta::Model>(docs.scenario.metamodel, meta::ModelTag::Scenario);
    sync = std::make_unique<sync::Synchronizer>(runtime, *scenario, writer);
    sync->reload_rules(docs.rules);
  }

  mapping::RuleSet rules(const std::string& name) {
    return mapping::parse_rules(testing::fixture_text("planting/" + name));
  }

  sync::SyncResult poll_and_sync() {
    return sync->sync_runtime_to_scenario(connector.poll_due());
  }

  ChangeEvent engine_set(const std::string& id, const std::string& attr, Value v,
                         Origin origin = Origin::ScenarioEngine) {
    ChangeEvent ev;
    ev.model = meta::ModelTag::Scenario;
    ev.element_id = id;
    ev.kind = meta::ChangeKind::AttrChanged;
    ev.class_name = scenario->at(id).class_name;
    ev.attr = attr;
    ev.old_value = scenario->at(id).get(attr);
    ev.new_value = v;
    ev.origin = origin;
    scenario->apply(ev);
    return ev;
  }

  bool truth_power(const char* plug) {
    return service->with_fleet([&](sim::Fleet& f) { return std::get<bool>(f.truth(plug).attrs.at("power")); });
  }
};

}  // namespace

TEST_SUITE("sync") {

TEST_CASE("a plant monitor becomes a Plant with copied readings") {
  Planting p;
  const meta::ModelElement* plant = p.scenario->find("plant@flora-01");
  REQUIRE(plant);
  CHECK(plant->class_name == "Plant");
  const auto& truth = p.runtime.at("flora-01");
  CHECK(meta::same_value(plant->get("soilMoisture"), truth.get("soil_moisture")));
  CHECK(meta::same_value(plant->get("temperature"), truth.get("temperature")));
  CHECK(meta::same_value(plant->get("soilFertility"), truth.get("soil_fertility")));
  CHECK(meta::same_value(plant->get("accumulatedLight"), truth.get("accumulated_light")));
  CHECK(p.scenario->contains("lamp@mi-plug-01"));
  CHECK(p.scenario->contains("pump@haier-plug-01"));
  CHECK(p.scenario->contains("recognizer@xingse-01"));
  CHECK(p.sync->version() == 1);
}

TEST_CASE("quiescence") {
  Planting p;
  auto r = p.sync->sync_runtime_to_scenario({});
  CHECK(r.scenario_events.empty());
  CHECK(p.poll_and_sync().scenario_events.empty());
  CHECK(p.sync->full_resync().scenario_events.empty());
  CHECK(p.writer.writes.empty());
}

TEST_CASE("engine writes reach the bound plug exactly once") {
  Planting p;
  auto ev = p.engine_set("lamp@mi-plug-01", "on", true);
  auto r = p.sync->sync_scenario_to_runtime({ev});
  REQUIRE(p.writer.writes.size() == 1);
  CHECK(p.writer.writes[0].dev_id == "mi-plug-01");
  CHECK(p.writer.writes[0].attr == "power");
  CHECK(p.writer.writes[0].value == Value(true));
  CHECK(p.truth_power("mi-plug-01"));
  CHECK(p.runtime.at("mi-plug-01").get("power") == Value(true));
  // The acknowledgement is already reflected: the next poll sees nothing new.
  CHECK(p.poll_and_sync().scenario_events.empty());
  CHECK(p.writer.writes.size() == 1);
}

TEST_CASE("echo suppression and direction") {
  Planting p;
  auto echo = p.engine_set("lamp@mi-plug-01", "on", true, Origin::Synchronizer);
  p.sync->sync_scenario_to_runtime({echo});
  CHECK(p.writer.writes.empty());

  auto temp = p.engine_set("plant@flora-01", "temperature", 35.0);
  p.sync->sync_scenario_to_runtime({temp});
  CHECK(p.writer.writes.empty());
}

TEST_CASE("reload retargets the lamp") {
  Planting p;
  auto r = p.sync->reload_rules(p.rules("rules-swapped.xml"));
  CHECK(p.sync->version() == 2);
  CHECK_FALSE(p.scenario->contains("lamp@mi-plug-01"));
  CHECK(p.scenario->contains("lamp@haier-plug-01"));
  CHECK(p.scenario->contains("pump@mi-plug-01"));
  auto b = p.sync->binding_for_scenario("lamp@haier-plug-01");
  REQUIRE(b);
  CHECK(b->runtime_id == "haier-plug-01");

  auto ev = p.engine_set("lamp@haier-plug-01", "on", true);
  p.sync->sync_scenario_to_runtime({ev});
  CHECK(p.truth_power("haier-plug-01"));
  CHECK_FALSE(p.truth_power("mi-plug-01"));
}

TEST_CASE("identical reload keeps bindings and state") {
  Planting p;
  auto bindings = p.sync->bindings();
  meta::Model before = *p.scenario;
  auto r = p.sync->reload_rules(p.docs.rules);
  CHECK(r.scenario_events.empty());
  CHECK(p.sync->bindings() == bindings);
  CHECK(*p.scenario == before);
}

TEST_CASE("an invalid reload changes nothing") {
  Planting p;
  auto bad = p.rules("rules.xml");
  bad.rules[2].target_class = "Lampp";
  meta::Model before = *p.scenario;
  try {
    p.sync->reload_rules(bad);
    FAIL("expected ValidationFailed");
  } catch (const sync::ValidationFailed& e) {
    REQUIRE_FALSE(e.diagnostics().empty());
    CHECK(e.diagnostics()[0].subject == "lamp");
  }
  CHECK(p.sync->version() == 1);
  CHECK(p.sync->rules().rules[2].target_class == "Lamp");
  CHECK(*p.scenario == before);
}

TEST_CASE("dropping every binding and resyncing rebuilds the direct projection") {
  Planting p;
  p.service->with_fleet([](sim::Fleet& f) { f.step(5.0); });
  p.poll_and_sync();
  meta::Model before = *p.scenario;
  p.sync->reload_rules(mapping::RuleSet{});
  CHECK(p.scenario->size() == 0);
  CHECK(p.sync->bindings().empty());
  p.sync->reload_rules(p.docs.rules);
  CHECK(*p.scenario == before);
  std::string why;
  CHECK_MESSAGE(oracle::models_match(*p.scenario, oracle::project(p.runtime, p.docs.rules, p.docs.scenario.metamodel), 1e-9, &why), why);
}

TEST_CASE("an offline monitor keeps its last readings") {
  Planting p;
  auto last = p.scenario->at("plant@flora-01");
  p.service->with_fleet([](sim::Fleet& f) {
    f.set_online("flora-01", false);
    f.step(3.0);
  });
  for (int k = 0; k < 3; ++k) p.poll_and_sync();
  p.sync->full_resync();
  const auto& plant = p.scenario->at("plant@flora-01");
  CHECK(plant.get("online") == Value(false));
  CHECK(meta::same_value(plant.get("soilMoisture"), last.get("soilMoisture")));
  CHECK(meta::same_value(plant.get("accumulatedLight"), last.get("accumulatedLight")));
}

TEST_CASE("a failed write becomes a diagnostic and requests a resync") {
  Planting p;
  p.service->with_fleet([](sim::Fleet& f) { f.set_online("mi-plug-01", false); });
  auto ev = p.engine_set("lamp@mi-plug-01", "on", true);
  auto r = p.sync->sync_scenario_to_runtime({ev});
  REQUIRE(r.writes.size() == 1);
  CHECK_FALSE(r.writes[0].ok);
  CHECK_FALSE(r.diagnostics.empty());
  CHECK(p.sync->resync_pending());
  CHECK(p.sync->binding_for_scenario("lamp@mi-plug-01"));
  // Device truth wins: the resync restores the reported state.
  p.sync->full_resync();
  CHECK(p.scenario->at("lamp@mi-plug-01").get("on") == Value(false));
  CHECK_FALSE(p.sync->resync_pending());
}

TEST_CASE("rule-free scenario elements are never touched") {
  Planting p;
  p.scenario->instantiate("Lamp", "desk-lamp", {{"on", true}});
  p.sync->full_resync();
  p.sync->reload_rules(p.rules("rules-swapped.xml"));
  REQUIRE(p.scenario->contains("desk-lamp"));
  CHECK(p.scenario->at("desk-lamp").get("on") == Value(true));
  auto ev = p.engine_set("desk-lamp", "on", false);
  p.sync->sync_scenario_to_runtime({ev});
  CHECK(p.writer.writes.empty());
}

TEST_CASE("an evaluation fault skips only the faulty rule-element") {
  Planting p;
  auto rules = p.rules("rules.xml");
  rules.rules[0].attrs[4].expr = expr::parse_expr("source.temperature / (source.soil_fertility - source.soil_fertility)");
  p.sync->reload_rules(mapping::RuleSet{});
  auto r = p.sync->reload_rules(rules);
  CHECK_FALSE(p.scenario->contains("plant@flora-01"));
  CHECK(p.scenario->contains("lamp@mi-plug-01"));
  REQUIRE_FALSE(r.diagnostics.empty());
  CHECK(r.diagnostics[0].subject == "plant@flora-01");
  CHECK(r.diagnostics[0].message.find("DivisionByZero") != std::string::npos);
}

TEST_CASE("a later mapping of the same attribute wins on partial updates") {
  meta::Model runtime(oracle::world_runtime_metamodel(), meta::ModelTag::Runtime);
  meta::Model scenario(oracle::world_scenario_metamodel(), meta::ModelTag::Scenario);
  oracle::RecordingWriter writer;
  sync::Synchronizer s(runtime, scenario, writer);
  s.reload_rules(mapping::parse_rules(R"(<mappings>
  <map id="v" source="Sensor" target="View">
    <attr target="n" expr="source.i"/>
    <attr target="n" expr="source.j"/>
  </map>
</mappings>)"));
  s.sync_runtime_to_scenario({runtime.instantiate("Sensor", "a", {{"i", std::int64_t{1}}, {"j", std::int64_t{2}}})});
  CHECK(scenario.at("v@a").get("n") == Value(std::int64_t{2}));
  // Only the first mapping reads i; n must still come from j.
  s.sync_runtime_to_scenario({*runtime.set_attribute("a", "i", std::int64_t{5})});
  CHECK(scenario.at("v@a").get("n") == Value(std::int64_t{2}));
}

TEST_CASE("a reload that stops mapping an attribute returns it to its default") {
  meta::Model runtime(oracle::world_runtime_metamodel(), meta::ModelTag::Runtime);
  meta::Model scenario(oracle::world_scenario_metamodel(), meta::ModelTag::Scenario);
  oracle::RecordingWriter writer;
  sync::Synchronizer s(runtime, scenario, writer);
  s.reload_rules(mapping::parse_rules(
      R"(<mappings><map id="v" source="Sensor" target="View"><attr target="f" expr="source.x"/></map></mappings>)"));
  s.sync_runtime_to_scenario({runtime.instantiate("Sensor", "a", {{"x", 4.5}})});
  CHECK(scenario.at("v@a").get("f") == Value(4.5));
  auto r = s.reload_rules(mapping::parse_rules(
      R"(<mappings><map id="v" source="Sensor" target="View"><attr target="n" expr="source.i"/></map></mappings>)"));
  CHECK(scenario.at("v@a").get("f") == Value(0.0));
  REQUIRE(r.scenario_events.size() == 1);
  CHECK(r.scenario_events[0].attr == "f");
}

TEST_CASE("property: convergence, uniqueness and version stability over random worlds") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    std::mt19937_64 rng(seed);
    meta::Model runtime(oracle::world_runtime_metamodel(), meta::ModelTag::Runtime);
    meta::Model scenario(oracle::world_scenario_metamodel(), meta::ModelTag::Scenario);
    oracle::RecordingWriter writer;
    sync::Synchronizer s(runtime, scenario, writer);
    mapping::RuleSet rules = oracle::random_rules(rng);
    s.reload_rules(rules);
    for (int k = 0; k < 60; ++k) {
      std::vector<ChangeEvent> batch;
      int ops = 1 + static_cast<int>(rng() % 4);
      for (int o = 0; o < ops; ++o) {
        auto evs = oracle::random_runtime_op(runtime, rng);
        batch.insert(batch.end(), evs.begin(), evs.end());
      }
      sync::SyncResult r;
      if (k % 3 == 0) {
        s.enqueue(batch);
        r = s.process_pending();
      } else {
        r = s.sync_runtime_to_scenario(batch);
      }
      CHECK(r.version_at_start == r.version_at_end);
      CHECK(r.diagnostics.empty());
      if (k == 30) {
        rules = oracle::random_rules(rng);
        s.reload_rules(rules);
      }
    }
    std::string why;
    CHECK_MESSAGE(oracle::models_match(scenario, oracle::project(runtime, rules, oracle::world_scenario_metamodel()), 1e-9, &why),
                  "seed " << seed << ": " << why);
    auto bs = s.bindings();
    for (std::size_t i = 1; i < bs.size(); ++i) {
      CHECK(std::tie(bs[i - 1].rule_id, bs[i - 1].runtime_id) != std::tie(bs[i].rule_id, bs[i].runtime_id));
    }
    for (const auto& b : bs) {
      REQUIRE(scenario.contains(b.scenario_id));
      CHECK(runtime.contains(b.runtime_id));
      CHECK(scenario.at(b.scenario_id).class_name == rules.find(b.rule_id)->target_class);
    }
    CHECK(s.full_resync().scenario_events.empty());
    CHECK(writer.writes.empty());
  }
}

TEST_CASE("property: permuting a batch of independent events gives the same state") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    std::mt19937_64 rng(seed * 104729);
    mapping::RuleSet rules = oracle::random_rules(rng);
    meta::Model runtime(oracle::world_runtime_metamodel(), meta::ModelTag::Runtime);
    std::vector<ChangeEvent> history;
    for (int k = 0; k < 30; ++k) {
      auto evs = oracle::random_runtime_op(runtime, rng);
      history.insert(history.end(), evs.begin(), evs.end());
    }
    // One attribute change per live element: independent by construction.
    std::vector<ChangeEvent> batch;
    meta::Model after = runtime;
    for (const auto& [id, el] : runtime.elements()) {
      if (auto ev = after.set_attribute(id, "i", std::get<std::int64_t>(el.get("i")) + 1)) batch.push_back(*ev);
    }
    auto run = [&](std::vector<ChangeEvent> order) {
      meta::Model rt(oracle::world_runtime_metamodel(), meta::ModelTag::Runtime);
      meta::Model sc(oracle::world_scenario_metamodel(), meta::ModelTag::Scenario);
      oracle::RecordingWriter w;
      sync::Synchronizer s(rt, sc, w);
      s.reload_rules(rules);
      for (const auto& ev : history) rt.apply(ev);
      s.sync_runtime_to_scenario(history);
      for (const auto& ev : order) rt.apply(ev);
      s.sync_runtime_to_scenario(order);
      return sc;
    };
    meta::Model reference = run(batch);
    std::shuffle(batch.begin(), batch.end(), rng);
    CHECK(run(batch) == reference);
    std::reverse(batch.begin(), batch.end());
    CHECK(run(batch) == reference);
  }
}

}  // TEST_SUITE
