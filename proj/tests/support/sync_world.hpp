#pragma once

// Randomized runtime models and rule sets for synchronizer properties. Both
// runtime classes carry the attribute pool ExprGen draws from, so generated
// expressions type-check against either.

#include <memory>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rtm/mapping/rules.hpp"
#include "rtm/meta/model.hpp"
#include "rtm/runtime/connector.hpp"

namespace rtm::oracle {

std::shared_ptr<const meta::Metamodel> world_runtime_metamodel();
std::shared_ptr<const meta::Metamodel> world_scenario_metamodel();

/// 1 to 4 toScenario rules with random predicates and mappings. Expressions
/// avoid `/` and `target`, so every evaluation is fault-free and the
/// projection is a function of the runtime model alone.
mapping::RuleSet random_rules(std::mt19937_64& rng);

/// One random create, attribute change or delete over ids r0..r9. Returns
/// the events it caused.
std::vector<meta::ChangeEvent> random_runtime_op(meta::Model& runtime, std::mt19937_64& rng);

/// Counts and records writes, optionally forwarding them.
class RecordingWriter : public runtime::DeviceWriter {
 public:
  struct Write {
    std::string dev_id;
    std::string attr;
    meta::Value value;
  };

  explicit RecordingWriter(runtime::DeviceWriter* next = nullptr) : next_(next) {}

  std::vector<meta::ChangeEvent> push_write(std::string_view dev_id, std::string_view attr,
                                            const meta::Value& value) override {
    writes.push_back({std::string(dev_id), std::string(attr), value});
    return next_ ? next_->push_write(dev_id, attr, value) : std::vector<meta::ChangeEvent>{};
  }

  std::vector<Write> writes;

 private:
  runtime::DeviceWriter* next_;
};

}  // namespace rtm::oracle
