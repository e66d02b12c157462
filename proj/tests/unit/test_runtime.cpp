#include <doctest.h>

#include <random>

#include "rtm/runtime/connector.hpp"
#include "rtm/runtime/layout.hpp"

using namespace rtm;
using namespace rtm::runtime;
using sim::DeviceType;

namespace {

struct Rig {
  std::shared_ptr<sim::SimService> service;
  std::shared_ptr<InProcessTransport> transport;
  meta::Model model{runtime_metamodel(), meta::ModelTag::Runtime};
  DeviceConnector connector{model};

  Rig() {
    std::vector<sim::DeviceSetup> devs = {
        {"flora-01", DeviceType::PlantMonitor, sim::Powers::None, {}, false},
        {"mi-plug-01", DeviceType::SmartPlug, sim::Powers::Lamp, {}, false},
        {"haier-plug-01", DeviceType::SmartPlug, sim::Powers::Pump, {}, false},
        {"xingse-01", DeviceType::Recognizer, sim::Powers::None, {}, false},
    };
    service = std::make_shared<sim::SimService>(sim::Fleet(sim::SimConfig{}, devs), true);
    transport = std::make_shared<InProcessTransport>(service);
  }

  void register_all(int poll_interval = 1) {
    for (auto [id, type] : {std::pair{"flora-01", DeviceType::PlantMonitor},
                            std::pair{"mi-plug-01", DeviceType::SmartPlug},
                            std::pair{"haier-plug-01", DeviceType::SmartPlug},
                            std::pair{"xingse-01", DeviceType::Recognizer}}) {
      auto d = default_descriptor(id, type);
      d.poll_interval = poll_interval;
      connector.register_device(d, transport);
    }
  }

  template <typename Fn>
  decltype(auto) fleet(Fn&& fn) {
    return service->with_fleet(std::forward<Fn>(fn));
  }
};

// Every attribute the runtime model holds for a device equals the truth.
bool reflects_truth(Rig& rig, const std::string& id) {
  return rig.fleet([&](sim::Fleet& f) {
    const meta::ModelElement& el = rig.model.at(id);
    for (const auto& [name, v] : f.truth(id).attrs) {
      auto it = el.attrs.find(name);
      if (it == el.attrs.end() || !meta::same_value(it->second, v)) return false;
    }
    return true;
  });
}

}  // namespace

TEST_SUITE("runtime") {

TEST_CASE("layout metamodel") {
  const auto& mm = *runtime_metamodel();
  REQUIRE(mm.find("SmartHomeOS"));
  REQUIRE(mm.find("Device"));
  REQUIRE(mm.find("Socket"));
  CHECK_FALSE(mm.at("Device").attribute("dev_id")->writable);
  CHECK_FALSE(mm.at("Device").attribute("online")->writable);
  CHECK(mm.at("Socket").attribute("power")->writable);
  CHECK(mm.at("SmartHomeOS").reference("devices")->target == "Device");
  CHECK(runtime_class(DeviceType::SmartPlug) == "Socket");
  CHECK(runtime_class(DeviceType::PlantMonitor) == "Device");
}

TEST_CASE("register_device") {
  Rig rig;
  auto evs = rig.connector.register_device(default_descriptor("mi-plug-01", DeviceType::SmartPlug), rig.transport);
  CHECK_FALSE(evs.empty());
  REQUIRE(rig.model.root());
  CHECK(*rig.model.root() == kRootId);
  const auto& el = rig.model.at("mi-plug-01");
  CHECK(el.class_name == "Socket");
  CHECK(el.get("online") == meta::Value(false));
  CHECK(rig.model.at(std::string(kRootId)).refs.at("sockets") == std::vector<std::string>{"mi-plug-01"});

  try {
    rig.connector.register_device(default_descriptor("mi-plug-01", DeviceType::SmartPlug), rig.transport);
    FAIL("expected DuplicateDevice");
  } catch (const RuntimeError& e) {
    CHECK(e.code() == RuntimeErrc::DuplicateDevice);
  }
  auto bad = default_descriptor("haier-plug-01", DeviceType::SmartPlug);
  bad.poll_interval = 0;
  try {
    rig.connector.register_device(bad, rig.transport);
    FAIL("expected DescriptorInvalid");
  } catch (const RuntimeError& e) {
    CHECK(e.code() == RuntimeErrc::DescriptorInvalid);
  }
  CHECK_FALSE(rig.model.contains("haier-plug-01"));

  auto bogus = default_descriptor("flora-01", DeviceType::PlantMonitor);
  bogus.writable.push_back({"temperature", meta::AttrType::floating()});
  CHECK_FALSE(descriptor_problems(bogus).empty());
  bogus = default_descriptor("flora-01", DeviceType::PlantMonitor);
  bogus.offline_after = 0;
  CHECK_FALSE(descriptor_problems(bogus).empty());
}

TEST_CASE("poll_once reports deltas only") {
  Rig rig;
  rig.register_all();
  for (const auto& id : rig.connector.device_ids()) rig.connector.poll_once(id);
  CHECK(rig.connector.poll_once("mi-plug-01").empty());

  rig.fleet([](sim::Fleet& f) { f.set_state("mi-plug-01", {{"power", true}}); });
  auto evs = rig.connector.poll_once("mi-plug-01");
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].attr == "power");
  CHECK(evs[0].old_value == meta::Value(false));
  CHECK(evs[0].new_value == meta::Value(true));
  CHECK(evs[0].origin == meta::Origin::External);
  CHECK(rig.connector.poll_once("mi-plug-01").empty());
}

TEST_CASE("three failed polls flip online exactly once") {
  Rig rig;
  rig.register_all();
  rig.connector.poll_once("haier-plug-01");
  CHECK(rig.model.at("haier-plug-01").get("online") == meta::Value(true));

  rig.fleet([](sim::Fleet& f) { f.set_online("haier-plug-01", false); });
  int flips = 0;
  for (int k = 0; k < 6; ++k) {
    for (const auto& ev : rig.connector.poll_once("haier-plug-01")) {
      CHECK(ev.attr == "online");
      CHECK(ev.origin == meta::Origin::External);
      ++flips;
      CHECK(k == 2);
    }
  }
  CHECK(flips == 1);
  CHECK(rig.connector.consecutive_failures("haier-plug-01") == 6);
  CHECK(rig.model.at("haier-plug-01").get("online") == meta::Value(false));

  rig.fleet([](sim::Fleet& f) { f.set_online("haier-plug-01", true); });
  auto back = rig.connector.poll_once("haier-plug-01");
  REQUIRE(back.size() == 1);
  CHECK(back[0].new_value == meta::Value(true));
  CHECK(rig.connector.consecutive_failures("haier-plug-01") == 0);
}

TEST_CASE("push_write") {
  Rig rig;
  rig.register_all();
  for (const auto& id : rig.connector.device_ids()) rig.connector.poll_once(id);

  auto evs = rig.connector.push_write("mi-plug-01", "power", true);
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].origin == meta::Origin::Synchronizer);
  CHECK(rig.model.at("mi-plug-01").get("power") == meta::Value(true));
  CHECK(rig.fleet([](sim::Fleet& f) { return std::get<bool>(f.truth("mi-plug-01").attrs.at("power")); }));
  CHECK(rig.connector.writes_issued() == 1);

  try {
    rig.connector.push_write("flora-01", "temperature", 30.0);
    FAIL("expected ReadOnlyAttribute");
  } catch (const RuntimeError& e) {
    CHECK(e.code() == RuntimeErrc::ReadOnlyAttribute);
  }
  CHECK_THROWS_AS(rig.connector.push_write("mi-plug-01", "power", std::string("on")), RuntimeError);
  CHECK_THROWS_AS(rig.connector.push_write("nope", "power", true), RuntimeError);

  // Offline devices fail fast and leave the model as it was.
  rig.fleet([](sim::Fleet& f) { f.set_online("mi-plug-01", false); });
  meta::Model before = rig.model;
  try {
    rig.connector.push_write("mi-plug-01", "power", false);
    FAIL("expected DeviceOffline");
  } catch (const RuntimeError& e) {
    CHECK(e.code() == RuntimeErrc::DeviceOffline);
  }
  CHECK(rig.model == before);

  // A recognizer write updates the species through the acknowledgement.
  auto rec = rig.connector.push_write("xingse-01", "plant_name", std::string("basil"));
  CHECK(rig.model.at("xingse-01").get("species") == meta::Value(std::string("basil")));
  for (const auto& ev : rec) CHECK(ev.origin == meta::Origin::Synchronizer);
}

TEST_CASE("property: eventual reflection after two poll intervals") {
  for (int interval : {1, 2, 3}) {
    Rig rig;
    rig.register_all(interval);
    std::mt19937_64 rng(interval);
    for (int round = 0; round < 20; ++round) {
      rig.fleet([&](sim::Fleet& f) {
        f.step(std::uniform_real_distribution<double>(0.1, 2.0)(rng));
        f.set_state("mi-plug-01", {{"power", rng() % 2 == 0}});
        if (round % 5 == 0) f.recognize(rng() % 2 ? "fern" : "cactus");
      });
      for (int t = 0; t < 2 * interval; ++t) {
        for (const auto& ev : rig.connector.poll_due()) CHECK(ev.origin == meta::Origin::External);
      }
      for (const auto& id : rig.connector.device_ids()) CHECK(reflects_truth(rig, id));
      // Quiescent devices produce nothing on the next cycle.
      for (const auto& id : rig.connector.device_ids()) CHECK(rig.connector.poll_once(id).empty());
    }
  }
}

TEST_CASE("descriptors from a roster report JSON pointers") {
  nlohmann::json roster = {
      {"devices",
       {{{"dev_id", "flora-01"}, {"device_type", "PlantMonitor"}, {"poll_interval", 2}},
        {{"dev_id", "mi-plug-01"}, {"device_type", "Toaster"}},
        {{"dev_id", "haier-plug-01"}, {"device_type", "SmartPlug"}, {"offline_after", 0}}}}};
  std::vector<Diagnostic> diags;
  auto ds = descriptors_from_json(roster, "roster.json", diags);
  REQUIRE(ds.size() >= 1);
  CHECK(ds[0].poll_interval == 2);
  REQUIRE(diags.size() == 2);
  CHECK(diags[0].where.pointer.starts_with("/devices/1"));
  CHECK(diags[1].where.pointer.starts_with("/devices/2"));
  CHECK(diags[0].where.file == "roster.json");
}

}  // TEST_SUITE
