#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rtm/meta/value.hpp"

namespace rtm::expr {

using meta::Value;

enum class UnaryOp { Not, Neg };
enum class BinaryOp { Or, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div };
enum class Function { Abs, Min, Max };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Literal {
  Value value;
};

/// `root.attr` where root is `source`, `target`, `self` or a name the
/// evaluation context resolves (scenario class names).
struct Path {
  std::string root;
  std::string attr;
};

struct Unary {
  UnaryOp op;
  ExprPtr operand;
};

struct Binary {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct Call {
  Function fn;
  std::vector<ExprPtr> args;
};

/// Immutable expression node. `position` is the 0-based offset of the node's
/// first token in the source text.
struct Expr {
  std::variant<Literal, Path, Unary, Binary, Call> node;
  std::size_t position = 0;
};

/// Structural equality; positions are ignored and Float literals compare by
/// bit pattern.
bool operator==(const Expr& a, const Expr& b);
bool equal(const ExprPtr& a, const ExprPtr& b);

ExprPtr make_literal(Value v, std::size_t pos = 0);
ExprPtr make_path(std::string root, std::string attr, std::size_t pos = 0);
ExprPtr make_unary(UnaryOp op, ExprPtr operand, std::size_t pos = 0);
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, std::size_t pos = 0);
ExprPtr make_call(Function fn, std::vector<ExprPtr> args, std::size_t pos = 0);

std::string_view symbol(BinaryOp op);
std::string_view symbol(UnaryOp op);
std::string_view name(Function fn);
std::size_t arity(Function fn);

bool is_comparison(BinaryOp op);
bool is_arithmetic(BinaryOp op);
bool is_logical(BinaryOp op);

}  // namespace rtm::expr
