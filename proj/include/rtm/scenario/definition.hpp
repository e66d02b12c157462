#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtm/diagnostic.hpp"
#include "rtm/error.hpp"
#include "rtm/expr/ast.hpp"
#include "rtm/meta/metamodel.hpp"
#include "rtm/meta/model.hpp"

namespace rtm::scenario {

// Scenario documents declare the scenario metamodel, instance bounds,
// virtual elements and behavior. Expressions navigate by class name:
// `Plant.soilMoisture` reads the unique Plant element.

struct Cardinality {
  std::string class_name;
  int min = 0;
  std::optional<int> max;  // nullopt: unbounded
  SourceLocation where;
};

/// Placeholder-free text or one `{expr}` placeholder of a notify template.
struct TemplatePart {
  std::string text;
  expr::ExprPtr expr;  // null for literal text
};

enum class NotifySeverity { Info, Warning };

std::string_view to_string(NotifySeverity s);

/// `set`: assigns expr to `target_attr` of every element of `target_class`.
/// `notify`: appends a notification rendered from `message`.
struct Action {
  enum class Kind { Set, Notify } kind = Kind::Set;
  std::string target_class;
  std::string target_attr;
  expr::ExprPtr expr;
  NotifySeverity severity = NotifySeverity::Info;
  std::vector<TemplatePart> message;
  SourceLocation where;
};

enum class Trigger { Level, Edge };

/// Latched band: for on < off the rule activates when measure < on and
/// releases when measure > off; for on > off the comparisons flip.
struct Hysteresis {
  expr::ExprPtr measure;
  expr::ExprPtr on;
  expr::ExprPtr off;
};

/// Level rules run `then` while the condition holds and `otherwise` while it
/// does not. Edge rules run `then` when the condition becomes true and
/// `otherwise` when it becomes false. Hysteresis rules behave as level rules
/// over the latched state.
struct ActionRule {
  std::string id;
  expr::ExprPtr when;  // null for hysteresis rules
  Trigger trigger = Trigger::Level;
  std::optional<Hysteresis> hysteresis;
  std::vector<Action> then;
  std::vector<Action> otherwise;
  SourceLocation where;
};

struct Transition {
  std::string from;
  std::string to;
  expr::ExprPtr guard;  // null: always enabled
  std::vector<Action> actions;
  SourceLocation where;
};

struct StateMachineDef {
  std::string id;
  std::string initial;
  std::vector<std::string> states;
  std::vector<Transition> transitions;  // declaration order breaks guard ties
  SourceLocation where;
};

struct ElementDecl {
  std::string id;
  std::string class_name;
  std::vector<std::pair<std::string, expr::ExprPtr>> values;
  SourceLocation where;
};

struct ScenarioDef {
  std::string name;
  std::shared_ptr<const meta::Metamodel> metamodel;
  std::vector<Cardinality> cardinalities;
  std::vector<ElementDecl> elements;
  std::vector<ActionRule> rules;
  std::vector<StateMachineDef> machines;
  std::string file;
};

enum class ScenarioErrc { ParseError, ValidationFailed, CardinalityViolation, NoRecognizer };

std::string_view to_string(ScenarioErrc code);

class ScenarioError : public Error {
 public:
  ScenarioError(ScenarioErrc code, std::vector<Diagnostic> diags);
  ScenarioErrc code() const noexcept { return code_; }
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diags_; }

 private:
  ScenarioErrc code_;
  std::vector<Diagnostic> diags_;
};

/// Throws ScenarioError(ParseError) with one located diagnostic.
ScenarioDef parse_scenario(std::string_view document, const std::string& file = {});

/// Name resolution and type checking of every expression and target.
std::vector<Diagnostic> validate(const ScenarioDef& def);

/// Bound violations of `model`. With `upper_only`, missing elements are not
/// reported: rule-derived elements appear only after the first sync.
std::vector<Diagnostic> check_cardinality(const ScenarioDef& def, const meta::Model& model,
                                          bool upper_only = false);

}  // namespace rtm::scenario
