#include "rtm/expr/ast.hpp"

#include <algorithm>

namespace rtm::expr {

namespace {

struct NodeEqual {
  bool operator()(const Literal& a, const Literal& b) const {
    return meta::same_value(a.value, b.value);
  }
  bool operator()(const Path& a, const Path& b) const {
    return a.root == b.root && a.attr == b.attr;
  }
  bool operator()(const Unary& a, const Unary& b) const {
    return a.op == b.op && equal(a.operand, b.operand);
  }
  bool operator()(const Binary& a, const Binary& b) const {
    return a.op == b.op && equal(a.lhs, b.lhs) && equal(a.rhs, b.rhs);
  }
  bool operator()(const Call& a, const Call& b) const {
    return a.fn == b.fn && std::equal(a.args.begin(), a.args.end(), b.args.begin(), b.args.end(),
                                      [](const ExprPtr& x, const ExprPtr& y) { return equal(x, y); });
  }
  template <typename A, typename B>
  bool operator()(const A&, const B&) const {
    return false;
  }
};

}  // namespace

bool operator==(const Expr& a, const Expr& b) { return std::visit(NodeEqual{}, a.node, b.node); }

bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

ExprPtr make_literal(Value v, std::size_t pos) {
  return std::make_shared<const Expr>(Expr{Literal{std::move(v)}, pos});
}

ExprPtr make_path(std::string root, std::string attr, std::size_t pos) {
  return std::make_shared<const Expr>(Expr{Path{std::move(root), std::move(attr)}, pos});
}

ExprPtr make_unary(UnaryOp op, ExprPtr operand, std::size_t pos) {
  return std::make_shared<const Expr>(Expr{Unary{op, std::move(operand)}, pos});
}

ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, std::size_t pos) {
  return std::make_shared<const Expr>(Expr{Binary{op, std::move(lhs), std::move(rhs)}, pos});
}

ExprPtr make_call(Function fn, std::vector<ExprPtr> args, std::size_t pos) {
  return std::make_shared<const Expr>(Expr{Call{fn, std::move(args)}, pos});
}

std::string_view symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return "or";
    case BinaryOp::And: return "and";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "<>";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
  }
  return "?";
}

std::string_view symbol(UnaryOp op) { return op == UnaryOp::Not ? "not" : "-"; }

std::string_view name(Function fn) {
  switch (fn) {
    case Function::Abs: return "abs";
    case Function::Min: return "min";
    case Function::Max: return "max";
  }
  return "?";
}

std::size_t arity(Function fn) { return fn == Function::Abs ? 1 : 2; }

bool is_comparison(BinaryOp op) {
  switch (op) {
    case BinaryOp::Eq:
    case BinaryOp::Ne:
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return true;
    default: return false;
  }
}

bool is_arithmetic(BinaryOp op) {
  return op == BinaryOp::Add || op == BinaryOp::Sub || op == BinaryOp::Mul || op == BinaryOp::Div;
}

bool is_logical(BinaryOp op) { return op == BinaryOp::And || op == BinaryOp::Or; }

}  // namespace rtm::expr
