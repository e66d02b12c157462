#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rtm/expr/ast.hpp"
#include "rtm/meta/metamodel.hpp"

namespace rtm::expr {

/// Static types of the expression language. Enum attributes read as String.
enum class Type { Int, Float, Bool, String };

std::string_view to_string(Type t);
Type expr_type_of(const meta::AttrType& t);

/// Whether a value of type `actual` may be stored in an attribute declared
/// as `declared` (exact match, or Int into Float).
bool assignable(Type actual, const meta::AttrType& declared);

/// Classes visible to an expression. Unset roots are not in scope.
struct TypeEnv {
  const meta::MetaClass* source = nullptr;
  const meta::MetaClass* target = nullptr;
  const meta::MetaClass* self = nullptr;
  std::function<const meta::MetaClass*(std::string_view root)> named;
};

struct TypeIssue {
  std::size_t position = 0;
  std::string message;
};

struct TypeResult {
  std::optional<Type> type;  // empty when issues prevent typing
  std::vector<TypeIssue> issues;

  bool ok() const { return issues.empty(); }
};

TypeResult check(const Expr& e, const TypeEnv& env);

/// All (root, attr) pairs an expression reads.
std::set<std::pair<std::string, std::string>> reads(const Expr& e);

}  // namespace rtm::expr
