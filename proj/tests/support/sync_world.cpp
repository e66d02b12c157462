#include "sync_world.hpp"

#include <limits>

#include "rtm/meta/metamodel_text.hpp"

namespace rtm::oracle {

std::shared_ptr<const meta::Metamodel> world_runtime_metamodel() {
  static auto mm = meta::parse_metamodel(R"(class Sensor
  attr i:Int
  attr j:Int
  attr x:Float
  attr y:Float
  attr b:Bool
  attr s:String
end
class Actor
  attr i:Int
  attr j:Int
  attr x:Float
  attr y:Float
  attr b:Bool
  attr s:String
end
)", "world-runtime");
  return mm;
}

std::shared_ptr<const meta::Metamodel> world_scenario_metamodel() {
  static auto mm = meta::parse_metamodel(R"(class View
  attr n:Int
  attr f:Float
  attr flag:Bool
  attr label:String
end
class Switch
  attr on:Bool
  attr level:Float
end
)", "world-scenario");
  return mm;
}

mapping::RuleSet random_rules(std::mt19937_64& rng) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  ExprGenOptions opts;
  opts.max_depth = 4;
  opts.allow_division = false;
  opts.allow_target = false;
  opts.allow_named_roots = false;
  ExprGen gen(rng(), opts);

  mapping::RuleSet set;
  int count = 1 + pick(4);
  for (int r = 0; r < count; ++r) {
    mapping::MappingRule rule;
    rule.id = "r" + std::to_string(r);
    rule.source_class = pick(2) ? "Sensor" : "Actor";
    if (pick(4) != 0) rule.predicate = gen.of_type('b');
    bool view = pick(3) != 0;
    rule.target_class = view ? "View" : "Switch";
    std::vector<std::pair<std::string, char>> slots =
        view ? std::vector<std::pair<std::string, char>>{{"n", 'i'}, {"f", 'f'}, {"flag", 'b'}, {"label", 's'}}
             : std::vector<std::pair<std::string, char>>{{"on", 'b'}, {"level", 'f'}};
    int maps = pick(static_cast<int>(slots.size()) + 2);
    for (int m = 0; m < maps; ++m) {
      const auto& [attr, kind] = slots[pick(static_cast<int>(slots.size()))];
      // Float slots also take Int expressions.
      char k = kind == 'f' && pick(3) == 0 ? 'i' : kind;
      rule.attrs.push_back({attr, gen.of_type(k), {}});
    }
    set.rules.push_back(std::move(rule));
  }
  return set;
}

std::vector<meta::ChangeEvent> random_runtime_op(meta::Model& runtime, std::mt19937_64& rng) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  auto value_for = [&](const std::string& attr) -> meta::Value {
    if (attr == "i" || attr == "j") {
      int r = pick(12);
      if (r == 0) return std::numeric_limits<std::int64_t>::max();
      return std::int64_t{pick(21) - 10};
    }
    if (attr == "x" || attr == "y") return std::uniform_real_distribution<double>(-100, 100)(rng);
    if (attr == "b") return pick(2) == 0;
    static const char* kStrings[] = {"", "a", "b", "ab", "mi-plug-01"};
    return std::string(kStrings[pick(5)]);
  };
  static const char* kAttrs[] = {"i", "j", "x", "y", "b", "s"};

  std::string id = "r" + std::to_string(pick(10));
  std::vector<meta::ChangeEvent> out;
  if (!runtime.contains(id)) {
    meta::AttrMap init;
    for (const char* a : kAttrs) {
      if (pick(2)) init[a] = value_for(a);
    }
    out.push_back(runtime.instantiate(pick(2) ? "Sensor" : "Actor", id, init));
  } else if (pick(6) == 0) {
    out = runtime.remove(id);
  } else {
    int changes = 1 + pick(3);
    for (int c = 0; c < changes; ++c) {
      const char* a = kAttrs[pick(6)];
      if (auto ev = runtime.set_attribute(id, a, value_for(a))) out.push_back(*ev);
    }
  }
  return out;
}

}  // namespace rtm::oracle
