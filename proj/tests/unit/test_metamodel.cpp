#include <doctest.h>

#include <memory>
#include <random>

#include "rtm/meta/metamodel.hpp"
#include "rtm/meta/metamodel_text.hpp"
#include "rtm/meta/model.hpp"

using namespace rtm::meta;

namespace {

std::shared_ptr<Metamodel> home_registry() {
  auto mm = std::make_shared<Metamodel>("home");
  mm->define_classes({
      {"Hub",
       {{"name", AttrType::string(), true}},
       {{"items", "Item", Multiplicity::Many}, {"main", "Item", Multiplicity::ZeroOrOne}}},
      {"Item",
       {{"n", AttrType::integer(), true},
        {"f", AttrType::floating(), true},
        {"b", AttrType::boolean(), true},
        {"s", AttrType::string(), true},
        {"mode", AttrType::enumeration({"eco", "boost"}), true},
        {"ro", AttrType::integer(), false}},
       {}},
  });
  return mm;
}

Value random_value(std::mt19937_64& rng) {
  switch (std::uniform_int_distribution<int>(0, 5)(rng)) {
    case 0: return std::int64_t(std::uniform_int_distribution<int>(-3, 3)(rng));
    case 1: return std::uniform_real_distribution<double>(-2, 2)(rng);
    case 2: return std::uniform_int_distribution<int>(0, 1)(rng) == 1;
    case 3: return std::string("eco");
    case 4: return std::string("boost");
    default: return std::string("x");
  }
}

Origin random_origin(std::mt19937_64& rng) {
  static const Origin kOrigins[] = {Origin::External, Origin::Synchronizer,
                                    Origin::ScenarioEngine, Origin::Console};
  return kOrigins[std::uniform_int_distribution<int>(0, 3)(rng)];
}

// Applies `count` random operations; failed operations must leave no trace,
// successful ones append their events.
void random_ops(Model& m, std::mt19937_64& rng, int count, std::vector<ChangeEvent>& log) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  auto some_id = [&] { return std::string(pick(2) ? "i" : "h") + std::to_string(pick(6)); };
  for (int k = 0; k < count; ++k) {
    Model before = m;
    try {
      switch (pick(6)) {
        case 0: {
          std::string id = some_id();
          AttrMap init;
          if (id[0] == 'i' && pick(2)) init["n"] = random_value(rng);
          log.push_back(m.instantiate(id[0] == 'i' ? "Item" : "Hub", id, init, random_origin(rng)));
          break;
        }
        case 1:
        case 2: {
          static const char* kAttrs[] = {"n", "f", "b", "s", "mode", "ro", "name"};
          if (auto ev = m.set_attribute(some_id(), kAttrs[pick(7)], random_value(rng), random_origin(rng))) {
            log.push_back(*ev);
          }
          break;
        }
        case 3: {
          if (auto ev = m.link(some_id(), pick(2) ? "items" : "main", some_id())) log.push_back(*ev);
          break;
        }
        case 4: {
          if (auto ev = m.unlink(some_id(), pick(2) ? "items" : "main", some_id())) log.push_back(*ev);
          break;
        }
        default: {
          auto evs = m.remove(some_id());
          log.insert(log.end(), evs.begin(), evs.end());
          break;
        }
      }
    } catch (const ModelError&) {
      CHECK(m == before);
    }
  }
}

void check_sound(const Model& m) {
  for (const auto& [id, el] : m.elements()) {
    const MetaClass& cls = m.metamodel().at(el.class_name);
    REQUIRE(el.attrs.size() == cls.attributes.size());
    for (const auto& a : cls.attributes) {
      REQUIRE(el.attrs.count(a.name) == 1);
      CHECK(conforms(el.attrs.at(a.name), a.type));
    }
    for (const auto& [ref, targets] : el.refs) {
      const ReferenceDef* def = cls.reference(ref);
      REQUIRE(def != nullptr);
      if (def->multiplicity != Multiplicity::Many) CHECK(targets.size() <= 1);
      for (const auto& t : targets) {
        REQUIRE(m.contains(t));
        CHECK(m.at(t).class_name == def->target);
      }
    }
  }
}

}  // namespace

TEST_SUITE("metamodel") {

TEST_CASE("define_class registers and rejects") {
  Metamodel mm("scenario");
  const MetaClass& plant = mm.define_class(
      {"Plant",
       {{"name", AttrType::string(), true},
        {"accumulatedLight", AttrType::floating(), true},
        {"temperature", AttrType::floating(), true},
        {"soilMoisture", AttrType::floating(), true},
        {"soilFertility", AttrType::floating(), true},
        {"lightMin", AttrType::floating(), true},
        {"lightMax", AttrType::floating(), true}},
       {}});
  CHECK(plant.name == "Plant");
  CHECK(mm.find("Plant") == &plant);

  MetaClass lamp{"Lamp", {{"on", AttrType::boolean(), true}}, {}};
  mm.define_class(lamp);
  try {
    mm.define_class(lamp);
    FAIL("expected DuplicateClass");
  } catch (const ModelError& e) {
    CHECK(e.code() == ModelErrc::DuplicateClass);
  }

  try {
    mm.define_class({"Pump", {{"on", AttrType::boolean(), true}, {"on", AttrType::boolean(), true}}, {}});
    FAIL("expected DuplicateMember");
  } catch (const ModelError& e) {
    CHECK(e.code() == ModelErrc::DuplicateMember);
  }
  CHECK(mm.find("Pump") == nullptr);

  try {
    mm.define_class({"Hub", {}, {{"items", "Nowhere", Multiplicity::Many}}});
    FAIL("expected UnknownTargetClass");
  } catch (const ModelError& e) {
    CHECK(e.code() == ModelErrc::UnknownTargetClass);
  }
}

TEST_CASE("batch definition may reference forward and is atomic") {
  Metamodel mm;
  mm.define_classes({{"A", {}, {{"b", "B", Multiplicity::One}}}, {"B", {}, {}}});
  CHECK(mm.find("A") != nullptr);
  CHECK_THROWS_AS(mm.define_classes({{"C", {}, {}}, {"A", {}, {}}}), ModelError);
  CHECK(mm.find("C") == nullptr);
}

TEST_CASE("instantiate fills defaults and type-checks") {
  auto mm = std::make_shared<Metamodel>();
  mm->define_class({"Socket", {{"dev_id", AttrType::string(), false}, {"power", AttrType::boolean(), true}}, {}});
  mm->define_class({"Plant",
                    {{"name", AttrType::string(), true},
                     {"temperature", AttrType::floating(), true},
                     {"count", AttrType::integer(), true},
                     {"mode", AttrType::enumeration({"eco", "boost"}), true}},
                    {}});
  Model m(mm, ModelTag::Runtime);

  ChangeEvent ev = m.instantiate("Socket", "mi-plug-01", {{"power", false}});
  CHECK(ev.kind == ChangeKind::Created);
  CHECK(m.at("mi-plug-01").get("power") == Value(false));

  m.instantiate("Plant", "p1");
  const ModelElement& p = m.at("p1");
  CHECK(p.get("name") == Value(std::string()));
  CHECK(p.get("temperature") == Value(0.0));
  CHECK(p.get("count") == Value(std::int64_t{0}));
  CHECK(p.get("mode") == Value(std::string("eco")));

  try {
    m.instantiate("Plant", "p2", {{"temperature", std::string("hot")}});
    FAIL("expected TypeMismatch");
  } catch (const ModelError& e) {
    CHECK(e.code() == ModelErrc::TypeMismatch);
  }
  CHECK_FALSE(m.contains("p2"));
  CHECK_THROWS_AS(m.instantiate("Plant", "p1"), ModelError);
  CHECK_THROWS_AS(m.instantiate("Nope", "x"), ModelError);
  CHECK_THROWS_AS(m.instantiate("Plant", "p3", {{"mode", std::string("turbo")}}), ModelError);
}

TEST_CASE("set_attribute emits only real changes") {
  auto mm = std::make_shared<Metamodel>();
  mm->define_class({"Socket",
                    {{"dev_id", AttrType::string(), false},
                     {"power", AttrType::boolean(), true},
                     {"soilMoisture", AttrType::floating(), true}},
                    {}});
  Model m(mm, ModelTag::Runtime);
  m.instantiate("Socket", "s", {{"power", false}});

  auto ev = m.set_attribute("s", "power", true, Origin::Console);
  REQUIRE(ev);
  CHECK(ev->old_value == Value(false));
  CHECK(ev->new_value == Value(true));
  CHECK(ev->origin == Origin::Console);
  CHECK_FALSE(m.set_attribute("s", "power", true));

  // The kernel checks types only; ranges are someone else's job.
  CHECK(m.set_attribute("s", "soilMoisture", -5.0));
  // Int promotes into a Float slot.
  CHECK(m.set_attribute("s", "soilMoisture", std::int64_t{3}));
  CHECK(m.at("s").get("soilMoisture") == Value(3.0));

  try {
    m.set_attribute("s", "dev_id", std::string("x"), Origin::Console);
    FAIL("expected ReadOnlyAttribute");
  } catch (const ModelError& e) {
    CHECK(e.code() == ModelErrc::ReadOnlyAttribute);
  }
  CHECK(m.set_attribute("s", "dev_id", std::string("x"), Origin::External));
  CHECK_THROWS_AS(m.set_attribute("s", "power", std::int64_t{1}), ModelError);
  CHECK_THROWS_AS(m.set_attribute("s", "nope", true), ModelError);
  CHECK_THROWS_AS(m.set_attribute("t", "power", true), ModelError);
}

TEST_CASE("float equality is bitwise") {
  CHECK(same_value(0.1 + 0.2, 0.1 + 0.2));
  CHECK_FALSE(same_value(0.0, -0.0));
  CHECK_FALSE(same_value(0.1 + 0.2, 0.3));
  CHECK_FALSE(same_value(std::int64_t{1}, 1.0));
}

TEST_CASE("remove cascades links and respects multiplicity") {
  Model m(home_registry(), ModelTag::Runtime);
  m.instantiate("Hub", "h");
  m.instantiate("Item", "a");
  m.instantiate("Item", "b");
  m.set_root("h");
  CHECK(m.link("h", "items", "a"));
  CHECK(m.link("h", "items", "b"));
  CHECK_FALSE(m.link("h", "items", "a"));
  CHECK(m.link("h", "main", "a"));
  try {
    m.link("h", "main", "b");
    FAIL("expected MultiplicityViolation");
  } catch (const ModelError& e) {
    CHECK(e.code() == ModelErrc::MultiplicityViolation);
  }
  auto evs = m.remove("a");
  REQUIRE(evs.size() == 3);
  CHECK(evs.back().kind == ChangeKind::Deleted);
  CHECK(m.at("h").refs.at("items") == std::vector<std::string>{"b"});
  CHECK(m.at("h").refs.at("main").empty());
}

TEST_CASE("diff examples") {
  Model a(home_registry(), ModelTag::Scenario);
  a.instantiate("Item", "x", {{"n", std::int64_t{1}}});
  CHECK(diff(a, a).empty());

  Model b = a;
  b.set_attribute("x", "n", std::int64_t{2});
  auto d = diff(a, b);
  REQUIRE(d.size() == 1);
  CHECK(d[0].kind == ChangeKind::AttrChanged);
  CHECK(d[0].attr == "n");

  Model other(home_registry(), ModelTag::Scenario);
  try {
    diff(a, other);
    FAIL("expected MetamodelMismatch");
  } catch (const ModelError& e) {
    CHECK(e.code() == ModelErrc::MetamodelMismatch);
  }
}

TEST_CASE("property: type soundness and event completeness over random operations") {
  auto mm = home_registry();
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    std::mt19937_64 rng(seed);
    Model m(mm, ModelTag::Runtime);
    std::vector<ChangeEvent> log;
    random_ops(m, rng, 200, log);
    check_sound(m);

    Model replay(mm, ModelTag::Runtime);
    for (const auto& ev : log) replay.apply(ev);
    CHECK(replay.elements() == m.elements());
    for (const auto& ev : log) {
      if (ev.kind == ChangeKind::AttrChanged) CHECK_FALSE(same_value(*ev.old_value, *ev.new_value));
    }
  }
}

TEST_CASE("property: apply(A, diff(A, B)) == B") {
  auto mm = home_registry();
  for (std::uint64_t seed = 1; seed <= 80; ++seed) {
    std::mt19937_64 rng(seed * 7919);
    Model a(mm, ModelTag::Scenario);
    std::vector<ChangeEvent> sink;
    random_ops(a, rng, 120, sink);
    Model b = a;
    random_ops(b, rng, 120, sink);
    if (seed % 4 == 0) b = Model(mm, ModelTag::Scenario);
    auto d = diff(a, b);
    for (std::size_t i = 1; i < d.size(); ++i) {
      // Creations and attribute changes precede links, links precede deletions.
      auto rank = [](ChangeKind k) {
        return k == ChangeKind::Deleted ? 2 : (k == ChangeKind::Linked || k == ChangeKind::Unlinked ? 1 : 0);
      };
      CHECK(rank(d[i - 1].kind) <= rank(d[i].kind));
    }
    Model c = a;
    for (const auto& ev : d) c.apply(ev);
    CHECK(c.elements() == b.elements());
    CHECK(diff(b, c).empty());
  }
}

TEST_CASE("metamodel text round trip") {
  const char* text = R"(# runtime side
class SmartHomeOS
  attr name:String
  ref devices->Device
  ref primary->Device[0..1]
end
class Device
  attr dev_id:String:readonly
  attr mode:Enum(eco|boost)
  attr level:Float
  attr count:Int
  attr online:Bool:readonly
  ref owner->SmartHomeOS[1]
end
)";
  auto mm = parse_metamodel(text, "rt");
  REQUIRE(mm->find("Device") != nullptr);
  CHECK_FALSE(mm->at("Device").attribute("dev_id")->writable);
  CHECK(mm->at("SmartHomeOS").reference("primary")->multiplicity == Multiplicity::ZeroOrOne);
  CHECK(mm->at("SmartHomeOS").reference("devices")->multiplicity == Multiplicity::Many);
  std::string canon = serialize_metamodel(*mm);
  auto again = parse_metamodel(canon);
  CHECK(*again == *mm);
  CHECK(serialize_metamodel(*again) == canon);
}

TEST_CASE("metamodel text errors are located") {
  try {
    parse_metamodel("class A\n  attr x:Decimal\nend\n");
    FAIL("expected error");
  } catch (const MetamodelTextError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() > 0);
  }
  CHECK_THROWS_AS(parse_metamodel("class A\n  attr x:Int\n"), MetamodelTextError);
  CHECK_THROWS_AS(parse_metamodel("class A\n  ref r->Missing\nend\n"), MetamodelTextError);
}

}  // TEST_SUITE
