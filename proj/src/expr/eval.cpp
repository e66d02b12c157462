#include "rtm/expr/eval.hpp"

#include <cmath>

namespace rtm::expr {

std::string_view to_string(EvalErrc code) {
  switch (code) {
    case EvalErrc::DivisionByZero: return "DivisionByZero";
    case EvalErrc::NullNavigation: return "NullNavigation";
    case EvalErrc::UnknownAttribute: return "UnknownAttribute";
    case EvalErrc::TypeError: return "TypeError";
    case EvalErrc::Ambiguous: return "Ambiguous";
  }
  return "EvalError";
}

namespace {

using Int = std::int64_t;

bool is_num(const Value& v) { return v.index() <= 1; }
double as_double(const Value& v) {
  return v.index() == 0 ? static_cast<double>(std::get<Int>(v)) : std::get<double>(v);
}
Int wrap_add(Int a, Int b) {
  return static_cast<Int>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
Int wrap_sub(Int a, Int b) {
  return static_cast<Int>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
Int wrap_mul(Int a, Int b) {
  return static_cast<Int>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

[[noreturn]] void type_error(std::string_view op, const Value& a, const Value& b) {
  throw EvalError(EvalErrc::TypeError, "'" + std::string(op) + "' on " +
                                           std::string(meta::kind_name(a)) + " and " +
                                           std::string(meta::kind_name(b)));
}

// -1, 0, 1 for ordered operands; requires numbers or strings.
int order(std::string_view op, const Value& a, const Value& b) {
  if (is_num(a) && is_num(b)) {
    if (a.index() == 0 && b.index() == 0) {
      Int x = std::get<Int>(a), y = std::get<Int>(b);
      return x < y ? -1 : (y < x ? 1 : 0);
    }
    double x = as_double(a), y = as_double(b);
    if (x < y) return -1;
    if (y < x) return 1;
    return x == y ? 0 : 2;  // 2: unordered (NaN)
  }
  if (a.index() == 3 && b.index() == 3) {
    int c = std::get<std::string>(a).compare(std::get<std::string>(b));
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  type_error(op, a, b);
}

bool equals(const Value& a, const Value& b, std::string_view op) {
  if (a.index() == 2 && b.index() == 2) return std::get<bool>(a) == std::get<bool>(b);
  return order(op, a, b) == 0;
}

Value arith(BinaryOp op, const Value& a, const Value& b) {
  if (!is_num(a) || !is_num(b)) type_error(symbol(op), a, b);
  if (op == BinaryOp::Div) {
    double d = as_double(b);
    if (d == 0.0) throw EvalError(EvalErrc::DivisionByZero, "division by zero");
    return as_double(a) / d;
  }
  if (a.index() == 0 && b.index() == 0) {
    Int x = std::get<Int>(a), y = std::get<Int>(b);
    switch (op) {
      case BinaryOp::Add: return wrap_add(x, y);
      case BinaryOp::Sub: return wrap_sub(x, y);
      default: return wrap_mul(x, y);
    }
  }
  double x = as_double(a), y = as_double(b);
  switch (op) {
    case BinaryOp::Add: return x + y;
    case BinaryOp::Sub: return x - y;
    default: return x * y;
  }
}

const meta::ModelElement* root_element(const EvalContext& ctx, const std::string& root) {
  if (root == "source") return ctx.source;
  if (root == "target") return ctx.target;
  if (root == "self") return ctx.self;
  return ctx.resolve ? ctx.resolve(root) : nullptr;
}

}  // namespace

void Program::emit(const Expr& e) {
  if (const auto* lit = std::get_if<Literal>(&e.node)) {
    constants_.push_back(lit->value);
    code_.push_back({Op::Const, static_cast<std::uint32_t>(constants_.size() - 1)});
    return;
  }
  if (const auto* path = std::get_if<Path>(&e.node)) {
    loads_.push_back({path->root, path->attr});
    code_.push_back({Op::Load, static_cast<std::uint32_t>(loads_.size() - 1)});
    return;
  }
  if (const auto* un = std::get_if<Unary>(&e.node)) {
    emit(*un->operand);
    code_.push_back({un->op == UnaryOp::Not ? Op::Not : Op::Neg});
    return;
  }
  if (const auto* bin = std::get_if<Binary>(&e.node)) {
    emit(*bin->lhs);
    if (is_logical(bin->op)) {
      std::size_t jump = code_.size();
      code_.push_back({bin->op == BinaryOp::And ? Op::AndJump : Op::OrJump});
      emit(*bin->rhs);
      code_.push_back({Op::RequireBool});
      code_[jump].arg = static_cast<std::uint32_t>(code_.size());
      return;
    }
    emit(*bin->rhs);
    static constexpr Op kOps[] = {Op::Const, Op::Const, Op::Eq,  Op::Ne,  Op::Lt,  Op::Le,
                                  Op::Gt,    Op::Ge,    Op::Add, Op::Sub, Op::Mul, Op::Div};
    code_.push_back({kOps[static_cast<int>(bin->op)]});
    return;
  }
  const auto& call = std::get<Call>(e.node);
  for (const auto& a : call.args) emit(*a);
  code_.push_back({call.fn == Function::Abs ? Op::Abs
                                            : (call.fn == Function::Min ? Op::Min : Op::Max)});
}

Program Program::compile(const Expr& e) {
  Program p;
  p.emit(e);
  return p;
}

Value Program::run(const EvalContext& ctx) const {
  std::vector<Value> stack;
  stack.reserve(16);
  auto pop = [&] {
    Value v = std::move(stack.back());
    stack.pop_back();
    return v;
  };
  for (std::size_t pc = 0; pc < code_.size(); ++pc) {
    const Instr& in = code_[pc];
    switch (in.op) {
      case Op::Const: stack.push_back(constants_[in.arg]); break;
      case Op::Load: {
        const Load& ld = loads_[in.arg];
        const meta::ModelElement* el = root_element(ctx, ld.root);
        if (!el) throw EvalError(EvalErrc::NullNavigation, "'" + ld.root + "' is absent");
        auto it = el->attrs.find(ld.attr);
        if (it == el->attrs.end()) {
          throw EvalError(EvalErrc::UnknownAttribute, ld.root + "." + ld.attr);
        }
        stack.push_back(it->second);
        break;
      }
      case Op::Neg: {
        Value v = pop();
        if (v.index() == 0) stack.push_back(wrap_sub(0, std::get<Int>(v)));
        else if (v.index() == 1) stack.push_back(-std::get<double>(v));
        else throw EvalError(EvalErrc::TypeError, "unary '-' on " + std::string(meta::kind_name(v)));
        break;
      }
      case Op::Not: {
        Value v = pop();
        if (v.index() != 2) {
          throw EvalError(EvalErrc::TypeError, "'not' on " + std::string(meta::kind_name(v)));
        }
        stack.push_back(!std::get<bool>(v));
        break;
      }
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div: {
        Value b = pop(), a = pop();
        static constexpr BinaryOp kArith[] = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul,
                                              BinaryOp::Div};
        stack.push_back(arith(kArith[static_cast<int>(in.op) - static_cast<int>(Op::Add)], a, b));
        break;
      }
      case Op::Lt:
      case Op::Le:
      case Op::Gt:
      case Op::Ge: {
        Value b = pop(), a = pop();
        static constexpr std::string_view kSym[] = {"<", "<=", ">", ">="};
        int idx = static_cast<int>(in.op) - static_cast<int>(Op::Lt);
        int c = order(kSym[idx], a, b);
        bool r = false;
        if (c != 2) {
          switch (in.op) {
            case Op::Lt: r = c < 0; break;
            case Op::Le: r = c <= 0; break;
            case Op::Gt: r = c > 0; break;
            default: r = c >= 0; break;
          }
        }
        stack.push_back(r);
        break;
      }
      case Op::Eq:
      case Op::Ne: {
        Value b = pop(), a = pop();
        bool eq = equals(a, b, in.op == Op::Eq ? "=" : "<>");
        stack.push_back(in.op == Op::Eq ? eq : !eq);
        break;
      }
      case Op::Abs: {
        Value v = pop();
        if (v.index() == 0) {
          Int i = std::get<Int>(v);
          stack.push_back(i < 0 ? wrap_sub(0, i) : i);
        } else if (v.index() == 1) {
          stack.push_back(std::fabs(std::get<double>(v)));
        } else {
          throw EvalError(EvalErrc::TypeError, "abs on " + std::string(meta::kind_name(v)));
        }
        break;
      }
      case Op::Min:
      case Op::Max: {
        Value b = pop(), a = pop();
        std::string_view fn = in.op == Op::Min ? "min" : "max";
        if (!is_num(a) || !is_num(b)) type_error(fn, a, b);
        bool pick_b = in.op == Op::Min ? order(fn, b, a) == -1 : order(fn, a, b) == -1;
        if (a.index() == 0 && b.index() == 0) {
          stack.push_back(pick_b ? b : a);
        } else {
          stack.push_back(as_double(pick_b ? b : a));
        }
        break;
      }
      case Op::AndJump:
      case Op::OrJump: {
        const Value& top = stack.back();
        if (top.index() != 2) {
          throw EvalError(EvalErrc::TypeError, std::string(in.op == Op::AndJump ? "'and'" : "'or'") +
                                                   " on " + std::string(meta::kind_name(top)));
        }
        bool lhs = std::get<bool>(top);
        if (lhs == (in.op == Op::OrJump)) {
          pc = in.arg - 1;
        } else {
          stack.pop_back();
        }
        break;
      }
      case Op::RequireBool:
        if (stack.back().index() != 2) {
          throw EvalError(EvalErrc::TypeError,
                          "logical operand is " + std::string(meta::kind_name(stack.back())));
        }
        break;
    }
  }
  return std::move(stack.back());
}

Value eval(const Expr& e, const EvalContext& ctx) { return Program::compile(e).run(ctx); }

}  // namespace rtm::expr
