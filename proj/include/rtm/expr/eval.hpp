#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "rtm/error.hpp"
#include "rtm/expr/ast.hpp"
#include "rtm/meta/model.hpp"

namespace rtm::expr {

// Dynamic semantics:
//  - Int op Int stays Int for + - * and wraps on overflow; any Float operand
//    promotes the other side. '/' always yields Float and faults on a zero
//    divisor.
//  - < <= > >= compare numbers or Strings (lexicographic); = and <> also
//    accept Bool pairs. Mixed Int/Float compares as Float.
//  - `and` / `or` evaluate left to right and short-circuit.
//  - min(a, b) returns b only when b < a; abs of the most negative Int wraps.
// Operands are evaluated left to right and the first fault wins.

enum class EvalErrc { DivisionByZero, NullNavigation, UnknownAttribute, TypeError, Ambiguous };

std::string_view to_string(EvalErrc code);

class EvalError : public Error {
 public:
  EvalError(EvalErrc code, const std::string& what)
      : Error(std::string(to_string(code)) + ": " + what), code_(code) {}
  EvalErrc code() const noexcept { return code_; }

 private:
  EvalErrc code_;
};

/// Elements an expression can navigate from. `resolve` handles any root that
/// is not source/target/self; it returns nullptr for an absent element and
/// may throw EvalError(Ambiguous).
struct EvalContext {
  const meta::ModelElement* source = nullptr;
  const meta::ModelElement* target = nullptr;
  const meta::ModelElement* self = nullptr;
  std::function<const meta::ModelElement*(std::string_view root)> resolve;
};

/// An expression compiled to stack code. Rules are compiled once at load and
/// run on every sync or behavior step.
class Program {
 public:
  static Program compile(const Expr& e);

  Value run(const EvalContext& ctx) const;

  std::size_t size() const { return code_.size(); }

 private:
  enum class Op : std::uint8_t {
    Const, Load, Neg, Not, Add, Sub, Mul, Div,
    Lt, Le, Gt, Ge, Eq, Ne, Abs, Min, Max,
    AndJump,  // lhs false -> jump keeping it, else pop
    OrJump,   // lhs true -> jump keeping it, else pop
    RequireBool,
  };
  struct Instr {
    Op op;
    std::uint32_t arg = 0;
  };
  struct Load {
    std::string root;
    std::string attr;
  };

  void emit(const Expr& e);

  std::vector<Instr> code_;
  std::vector<Value> constants_;
  std::vector<Load> loads_;
};

/// Compiles and runs in one go.
Value eval(const Expr& e, const EvalContext& ctx);

}  // namespace rtm::expr
