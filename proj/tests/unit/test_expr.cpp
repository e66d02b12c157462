#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "rtm/expr/eval.hpp"
#include "rtm/expr/parser.hpp"
#include "rtm/expr/typecheck.hpp"

using namespace rtm;
using namespace rtm::expr;

namespace {

const Binary& as_binary(const ExprPtr& e) { return std::get<Binary>(e->node); }

Value eval_text(std::string_view text, const EvalContext& ctx = {}) {
  return eval(*parse_expr(text), ctx);
}

EvalErrc fault_of(std::string_view text, const EvalContext& ctx = {}) {
  try {
    eval_text(text, ctx);
  } catch (const EvalError& e) {
    return e.code();
  }
  FAIL("expected a fault for " << text);
  return EvalErrc::TypeError;
}

// Outcome of one evaluation: a value or a fault code.
struct Outcome {
  bool faulted = false;
  EvalErrc code = EvalErrc::TypeError;
  Value value;
};

template <typename Fn>
Outcome run(Fn&& fn) {
  Outcome o;
  try {
    o.value = fn();
  } catch (const EvalError& e) {
    o.faulted = true;
    o.code = e.code();
  }
  return o;
}

bool same_outcome(const Outcome& a, const Outcome& b) {
  if (a.faulted || b.faulted) return a.faulted == b.faulted && a.code == b.code;
  if (a.value.index() != b.value.index()) return false;
  if (std::holds_alternative<double>(a.value)) {
    double x = std::get<double>(a.value), y = std::get<double>(b.value);
    if (std::isnan(x) && std::isnan(y)) return true;
  }
  return meta::same_value(a.value, b.value);
}

}  // namespace

TEST_SUITE("expr") {

TEST_CASE("precedence shapes") {
  auto e = parse_expr("1 + 2 * 3");
  CHECK(as_binary(e).op == BinaryOp::Add);
  CHECK(as_binary(as_binary(e).rhs).op == BinaryOp::Mul);

  e = parse_expr("source.dev_id = 'mi-plug-01'");
  CHECK(as_binary(e).op == BinaryOp::Eq);
  CHECK(std::holds_alternative<Path>(as_binary(e).lhs->node));
  CHECK(std::holds_alternative<Literal>(as_binary(e).rhs->node));

  e = parse_expr("not self.b = self.c");
  REQUIRE(std::holds_alternative<Unary>(e->node));
  CHECK(std::get<Unary>(e->node).op == UnaryOp::Not);
  CHECK(as_binary(std::get<Unary>(e->node).operand).op == BinaryOp::Eq);

  e = parse_expr("a.x or b.x and c.x");
  CHECK(as_binary(e).op == BinaryOp::Or);
  CHECK(as_binary(as_binary(e).rhs).op == BinaryOp::And);

  CHECK(eval_text("10 - 4 - 3") == Value(std::int64_t{3}));
  CHECK(eval_text("-2 * 3") == Value(std::int64_t{-6}));
  CHECK(eval_text("(1 + 2) * 3") == Value(std::int64_t{9}));
}

TEST_CASE("syntax errors carry positions") {
  auto position_of = [](std::string_view text) -> std::size_t {
    try {
      parse_expr(text);
    } catch (const SyntaxError& e) {
      return e.position();
    }
    return std::string_view::npos;
  };
  CHECK(position_of("1 < 2 < 3") == 6);
  CHECK(position_of("1 +") == 3);
  CHECK(position_of("source.") == 7);
  CHECK(position_of("'open") != std::string_view::npos);
  CHECK(position_of("min(1)") != std::string_view::npos);
  CHECK(position_of("2 $ 3") == 2);
}

TEST_CASE("round trip of a parenthesized example") {
  auto e = parse_expr("not (a.x < b.x or c.b)");
  CHECK(*parse_expr(print_expr(e)) == *e);
  CHECK(print_expr(e) == "not (a.x < b.x or c.b)");
}

TEST_CASE("evaluation examples") {
  meta::ModelElement dev;
  dev.attrs = {{"soil_moisture", std::int64_t{15}}, {"temperature", 23.5}};
  EvalContext ctx;
  ctx.source = &dev;
  ctx.self = &dev;
  CHECK(eval_text("source.soil_moisture < 20", ctx) == Value(true));
  CHECK(eval_text("source.temperature", ctx) == Value(23.5));
  CHECK(eval_text("self.temperature + 1", ctx) == Value(24.5));
  CHECK(eval_text("7 / 2") == Value(3.5));
  CHECK(eval_text("6 / 3") == Value(2.0));
  CHECK(eval_text("'abc' < 'abd'") == Value(true));
  CHECK(eval_text("min(1, 2.0)") == Value(1.0));
  CHECK(eval_text("max(3, 2)") == Value(std::int64_t{3}));
  CHECK(eval_text("abs(-2.5)") == Value(2.5));
  CHECK(eval_text("9223372036854775807 + 1") == Value(std::numeric_limits<std::int64_t>::min()));
  CHECK(eval_text("true = false") == Value(false));
  // Short-circuit hides the fault on the right.
  CHECK(eval_text("false and 1 / 0 > 1") == Value(false));
  CHECK(eval_text("true or source.x > 1") == Value(true));

  CHECK(fault_of("1 / 0") == EvalErrc::DivisionByZero);
  CHECK(fault_of("1.5 / 0.0") == EvalErrc::DivisionByZero);
  CHECK(fault_of("target.x") == EvalErrc::NullNavigation);
  CHECK(fault_of("source.missing", ctx) == EvalErrc::UnknownAttribute);
  CHECK(fault_of("1 + true") == EvalErrc::TypeError);
  CHECK(fault_of("true < false") == EvalErrc::TypeError);
  // Left to right: the first fault wins.
  CHECK(fault_of("target.x + 1 / 0") == EvalErrc::NullNavigation);
}

TEST_CASE("evaluation is pure") {
  oracle::Sandbox box;
  std::mt19937_64 rng(5);
  box.randomize(rng);
  oracle::Sandbox copy = box;
  auto ctx = box.context();
  auto e = parse_expr("source.i * 2 + Plant.x - abs(target.y)");
  Value first = eval(*e, ctx);
  Program p = Program::compile(*e);
  for (int k = 0; k < 5; ++k) CHECK(meta::same_value(p.run(ctx), first));
  CHECK(box.source == copy.source);
  CHECK(box.target == copy.target);
  CHECK(box.plant == copy.plant);
}

TEST_CASE("property: evaluator agrees with the reference evaluator") {
  std::size_t cases = 0, faults = 0;
  for (int pass = 0; pass < 2; ++pass) {
    oracle::ExprGenOptions opts;
    opts.well_typed = pass == 0;
    oracle::ExprGen gen(1000 + pass, opts);
    oracle::Sandbox box;
    for (int k = 0; k < 8000; ++k) {
      if (k % 8 == 0) box.randomize(gen.rng());
      ExprPtr e = gen.any();
      auto ctx = box.context();
      Outcome got = run([&] { return Program::compile(*e).run(ctx); });
      Outcome want = run([&] { return oracle::reference_eval(*e, ctx); });
      if (!same_outcome(got, want)) {
        FAIL_CHECK("mismatch on " << print_expr(e));
      }
      ++cases;
      faults += want.faulted ? 1 : 0;
    }
  }
  CHECK(cases >= 10000);
  // The corpus exercises faults as well as values.
  CHECK(faults > 500);
  CHECK(faults < cases / 2);
}

TEST_CASE("property: parse, print, parse is a fixpoint") {
  oracle::ExprGen gen(77, {6, false, true, true, true});
  for (int k = 0; k < 10000; ++k) {
    ExprPtr e = gen.any();
    std::string text = print_expr(e);
    ExprPtr once = parse_expr(text);
    CHECK_MESSAGE(*once == *e, text);
    CHECK(*parse_expr(print_expr(once)) == *once);
    CHECK(*parse_expr(print_expr(e, PrintStyle::FullyParenthesized)) == *e);
  }
}

TEST_CASE("property: precedence agrees with a parenthesized-only parser") {
  oracle::ExprGen gen(31337, {6, false, true, true, true});
  for (int k = 0; k < 5000; ++k) {
    ExprPtr e = gen.any();
    std::string minimal = print_expr(e);
    std::string full = print_expr(e, PrintStyle::FullyParenthesized);
    ExprPtr by_paren = oracle::parse_parenthesized(full);
    CHECK_MESSAGE(*by_paren == *e, full);
    CHECK_MESSAGE(*parse_expr(minimal) == *by_paren, minimal);
  }
}

TEST_CASE("typecheck") {
  meta::MetaClass socket{"Socket",
                         {{"power", meta::AttrType::boolean(), true},
                          {"dev_id", meta::AttrType::string(), false},
                          {"level", meta::AttrType::floating(), true},
                          {"mode", meta::AttrType::enumeration({"eco", "boost"}), true}},
                         {}};
  TypeEnv env;
  env.source = &socket;
  env.self = &socket;

  auto type_of = [&](std::string_view text) { return check(*parse_expr(text), env); };
  CHECK(type_of("source.dev_id = 'mi-plug-01'").type == Type::Bool);
  CHECK(type_of("source.level * 2").type == Type::Float);
  CHECK(type_of("7 / 2").type == Type::Float);
  CHECK(type_of("source.mode = 'eco'").type == Type::Bool);

  auto bad = type_of("source.power + 1");
  CHECK_FALSE(bad.ok());
  CHECK(bad.issues.front().position == 0);
  CHECK_FALSE(type_of("source.nope").ok());
  CHECK_FALSE(type_of("target.power").ok());
  CHECK_FALSE(type_of("1 < 'a'").ok());
  CHECK_FALSE(type_of("not 3").ok());

  CHECK(assignable(Type::Int, meta::AttrType::floating()));
  CHECK_FALSE(assignable(Type::Float, meta::AttrType::integer()));
  CHECK(assignable(Type::String, meta::AttrType::enumeration({"a"})));

  auto r = reads(*parse_expr("source.a + target.b * source.a"));
  CHECK(r.size() == 2);
  CHECK(r.count({"source", "a"}) == 1);
}

}  // TEST_SUITE
