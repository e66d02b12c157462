#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rtm/diagnostic.hpp"
#include "rtm/error.hpp"
#include "rtm/expr/ast.hpp"
#include "rtm/meta/metamodel.hpp"

namespace rtm::mapping {

enum class Direction { ToScenario, Bidirectional };

std::string_view to_string(Direction d);

struct AttrMapping {
  std::string target;  // scenario attribute
  expr::ExprPtr expr;  // over `source` (alias `self`) and optionally `target`
  SourceLocation where;
};

/// Identity pair copied from the scenario attribute back to the device.
struct Writeback {
  std::string source;  // runtime attribute
  std::string target;  // scenario attribute
  SourceLocation where;
};

struct MappingRule {
  std::string id;
  std::string source_class;
  expr::ExprPtr predicate;  // null: every element of source_class matches
  std::string target_class;
  Direction direction = Direction::ToScenario;
  std::vector<AttrMapping> attrs;
  std::vector<Writeback> writebacks;
  SourceLocation where;
  SourceLocation source_where;  // unset locations fall back to `where`
  SourceLocation target_where;
  SourceLocation predicate_where;
};

struct RuleSet {
  std::vector<MappingRule> rules;  // document order
  std::uint64_t version = 0;       // assigned when a synchronizer activates the set

  const MappingRule* find(std::string_view id) const;
};

/// Same rules in the same order; ignores versions and source locations.
bool equivalent(const RuleSet& a, const RuleSet& b);

enum class RuleErrc {
  XmlMalformed,
  UnknownElementTag,
  MissingAttribute,
  UnexpectedAttribute,
  InvalidValue,
  DuplicateRuleId,
  ExprSyntax,
};

std::string_view to_string(RuleErrc code);

class RuleParseError : public Error {
 public:
  RuleParseError(RuleErrc code, SourceLocation where, const std::string& what);
  RuleErrc code() const noexcept { return code_; }
  const SourceLocation& where() const noexcept { return where_; }
  const std::string& message() const noexcept { return message_; }
  Diagnostic diagnostic() const;

 private:
  RuleErrc code_;
  SourceLocation where_;
  std::string message_;
};

/// Parses a <mappings> document. `file` only labels locations.
RuleSet parse_rules(std::string_view document, const std::string& file = {});

/// Type-checks every expression and resolves every class and attribute name.
/// The set can be activated iff no Error-severity diagnostic is returned.
std::vector<Diagnostic> validate(const RuleSet& rules, const meta::Metamodel& runtime,
                                 const meta::Metamodel& scenario);

/// Canonical XML rendering; parse_rules(serialize_rules(r)) is equivalent to r.
std::string serialize_rules(const RuleSet& rules);

}  // namespace rtm::mapping
