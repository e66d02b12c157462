#pragma once

#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rtm/expr/eval.hpp"
#include "rtm/scenario/definition.hpp"

namespace rtm::scenario {

struct Notification {
  double sim_time = 0.0;
  std::string message;
  NotifySeverity severity = NotifySeverity::Info;
  std::string rule_id;
};

struct BehaviorResult {
  std::vector<meta::ChangeEvent> events;  // origin ScenarioEngine
  std::vector<Notification> notifications;
  std::vector<Diagnostic> diagnostics;
  std::vector<std::pair<std::string, std::string>> transitions;  // machine id, new state
};

/// Runs the behavior of a loaded scenario over its model.
///
/// One step: every state machine, in declaration order, takes at most one
/// transition (the first enabled one in declaration order of the current
/// state's outgoing transitions) and runs its actions; then every action rule
/// runs in declaration order. Assignments go through set_attribute, so
/// writes of the current value emit nothing. A fault in a guard, condition or
/// action skips that item only.
class ScenarioEngine {
 public:
  /// Validates the definition, instantiates the declared elements and checks
  /// upper cardinality bounds. `model` must be built over def.metamodel.
  /// Throws ScenarioError (ValidationFailed or CardinalityViolation).
  ScenarioEngine(ScenarioDef def, meta::Model& model);

  BehaviorResult step_behavior(double sim_time);

  /// Sets Recognizer.plantName with origin Console. Throws
  /// ScenarioError(NoRecognizer) when the model has no Recognizer.
  std::vector<meta::ChangeEvent> set_plant_name(std::string_view name);

  /// Console write to any writable attribute. Throws meta::ModelError.
  std::vector<meta::ChangeEvent> console_set(std::string_view element_id, std::string_view attr,
                                             const meta::Value& value);

  const std::vector<meta::ChangeEvent>& load_events() const { return load_events_; }
  const ScenarioDef& definition() const { return def_; }
  const std::string& state(std::string_view machine_id) const;
  bool latched(std::string_view rule_id) const;

 private:
  expr::EvalContext context() const;
  const expr::Program& program(const expr::ExprPtr& e);
  meta::Value evaluate(const expr::ExprPtr& e);
  void run(const std::vector<Action>& actions, const std::string& owner, double sim_time,
           BehaviorResult& out);
  void fault(const SourceLocation& where, const std::string& owner, const std::string& what,
             BehaviorResult& out);

  ScenarioDef def_;
  meta::Model& model_;
  std::map<std::string, std::string, std::less<>> states_;
  std::map<std::string, bool, std::less<>> latched_;
  std::unordered_map<const expr::Expr*, expr::Program> programs_;
  std::vector<meta::ChangeEvent> load_events_;
};

}  // namespace rtm::scenario
