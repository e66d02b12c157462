#pragma once

#include <string>
#include <string_view>

#include "rtm/error.hpp"
#include "rtm/expr/ast.hpp"

namespace rtm::expr {

// Precedence, loosest first:
//   or < and < not < comparison (= <> < <= > >=, non-associative)
//      < additive (+ -) < multiplicative (* /) < unary minus
// Binary arithmetic and logical operators associate to the left.

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& what)
      : Error("SyntaxError at offset " + std::to_string(position) + ": " + what),
        position_(position),
        message_(what) {}
  std::size_t position() const noexcept { return position_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t position_;
  std::string message_;
};

ExprPtr parse_expr(std::string_view text);

enum class PrintStyle {
  Minimal,           // parentheses only where precedence requires them
  FullyParenthesized // every unary and binary node wrapped
};

std::string print_expr(const Expr& e, PrintStyle style = PrintStyle::Minimal);
inline std::string print_expr(const ExprPtr& e, PrintStyle style = PrintStyle::Minimal) {
  return print_expr(*e, style);
}

/// Literal spelling used by the printer; Float literals always carry a '.'
/// or an exponent so they re-lex as Float.
std::string format_literal(const Value& v);

}  // namespace rtm::expr
