#include "rtm/expr/typecheck.hpp"

namespace rtm::expr {

std::string_view to_string(Type t) {
  switch (t) {
    case Type::Int: return "Int";
    case Type::Float: return "Float";
    case Type::Bool: return "Bool";
    case Type::String: return "String";
  }
  return "?";
}

Type expr_type_of(const meta::AttrType& t) {
  switch (t.kind) {
    case meta::ValueKind::Int: return Type::Int;
    case meta::ValueKind::Float: return Type::Float;
    case meta::ValueKind::Bool: return Type::Bool;
    case meta::ValueKind::String:
    case meta::ValueKind::Enum: return Type::String;
  }
  return Type::String;
}

bool assignable(Type actual, const meta::AttrType& declared) {
  Type want = expr_type_of(declared);
  return actual == want || (actual == Type::Int && want == Type::Float);
}

namespace {

bool numeric(Type t) { return t == Type::Int || t == Type::Float; }

class Checker {
 public:
  explicit Checker(const TypeEnv& env) : env_(env) {}

  std::optional<Type> visit(const Expr& e) {
    if (const auto* lit = std::get_if<Literal>(&e.node)) {
      switch (lit->value.index()) {
        case 0: return Type::Int;
        case 1: return Type::Float;
        case 2: return Type::Bool;
        default: return Type::String;
      }
    }
    if (const auto* path = std::get_if<Path>(&e.node)) return navigate(*path, e.position);
    if (const auto* un = std::get_if<Unary>(&e.node)) {
      auto t = visit(*un->operand);
      if (!t) return std::nullopt;
      if (un->op == UnaryOp::Not) {
        if (*t != Type::Bool) return issue(e.position, "'not' expects Bool, got " + tname(*t));
        return Type::Bool;
      }
      if (!numeric(*t)) return issue(e.position, "unary '-' expects a number, got " + tname(*t));
      return t;
    }
    if (const auto* bin = std::get_if<Binary>(&e.node)) return binary(*bin, e.position);
    return call(std::get<Call>(e.node), e.position);
  }

  std::vector<TypeIssue> issues;

 private:
  static std::string tname(Type t) { return std::string(to_string(t)); }

  std::optional<Type> issue(std::size_t pos, std::string msg) {
    issues.push_back({pos, std::move(msg)});
    return std::nullopt;
  }

  std::optional<Type> navigate(const Path& p, std::size_t pos) {
    const meta::MetaClass* cls = nullptr;
    if (p.root == "source") cls = env_.source;
    else if (p.root == "target") cls = env_.target;
    else if (p.root == "self") cls = env_.self;
    else if (env_.named) cls = env_.named(p.root);
    if (!cls) return issue(pos, "unknown identifier '" + p.root + "'");
    const meta::AttributeDef* attr = cls->attribute(p.attr);
    if (!attr) return issue(pos, "class " + cls->name + " has no attribute '" + p.attr + "'");
    return expr_type_of(attr->type);
  }

  std::optional<Type> binary(const Binary& b, std::size_t pos) {
    auto l = visit(*b.lhs);
    auto r = visit(*b.rhs);
    if (!l || !r) return std::nullopt;
    std::string op(symbol(b.op));
    if (is_logical(b.op)) {
      if (*l != Type::Bool || *r != Type::Bool) {
        return issue(pos, "'" + op + "' expects Bool operands, got " + tname(*l) + " and " + tname(*r));
      }
      return Type::Bool;
    }
    if (is_arithmetic(b.op)) {
      if (!numeric(*l) || !numeric(*r)) {
        return issue(pos, "'" + op + "' expects numbers, got " + tname(*l) + " and " + tname(*r));
      }
      if (b.op == BinaryOp::Div) return Type::Float;
      return (*l == Type::Int && *r == Type::Int) ? Type::Int : Type::Float;
    }
    bool equality = b.op == BinaryOp::Eq || b.op == BinaryOp::Ne;
    bool ok = (numeric(*l) && numeric(*r)) || (*l == Type::String && *r == Type::String) ||
              (equality && *l == Type::Bool && *r == Type::Bool);
    if (!ok) {
      return issue(pos, "cannot compare " + tname(*l) + " " + op + " " + tname(*r));
    }
    return Type::Bool;
  }

  std::optional<Type> call(const Call& c, std::size_t pos) {
    std::vector<Type> args;
    for (const auto& a : c.args) {
      auto t = visit(*a);
      if (!t) return std::nullopt;
      args.push_back(*t);
    }
    for (Type t : args) {
      if (!numeric(t)) {
        return issue(pos, std::string(name(c.fn)) + " expects numbers, got " + tname(t));
      }
    }
    if (c.fn == Function::Abs) return args[0];
    return (args[0] == Type::Int && args[1] == Type::Int) ? Type::Int : Type::Float;
  }

  const TypeEnv& env_;
};

void collect(const Expr& e, std::set<std::pair<std::string, std::string>>& out) {
  if (const auto* path = std::get_if<Path>(&e.node)) {
    out.emplace(path->root, path->attr);
  } else if (const auto* un = std::get_if<Unary>(&e.node)) {
    collect(*un->operand, out);
  } else if (const auto* bin = std::get_if<Binary>(&e.node)) {
    collect(*bin->lhs, out);
    collect(*bin->rhs, out);
  } else if (const auto* call = std::get_if<Call>(&e.node)) {
    for (const auto& a : call->args) collect(*a, out);
  }
}

}  // namespace

TypeResult check(const Expr& e, const TypeEnv& env) {
  Checker checker(env);
  TypeResult result;
  result.type = checker.visit(e);
  result.issues = std::move(checker.issues);
  if (!result.issues.empty()) result.type.reset();
  return result;
}

std::set<std::pair<std::string, std::string>> reads(const Expr& e) {
  std::set<std::pair<std::string, std::string>> out;
  collect(e, out);
  return out;
}

}  // namespace rtm::expr
