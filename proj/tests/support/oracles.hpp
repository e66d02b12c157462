#pragma once

// Independent reference implementations the suites compare the library
// against. Nothing here reuses the evaluator, the parser or the
// synchronizer; only the AST types and the model containers are shared.

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "rtm/expr/ast.hpp"
#include "rtm/expr/eval.hpp"
#include "rtm/mapping/rules.hpp"
#include "rtm/meta/model.hpp"

namespace rtm::oracle {

/// Tree-walking evaluator written from the documented semantics. Faults are
/// reported as expr::EvalError with the same codes.
meta::Value reference_eval(const expr::Expr& e, const expr::EvalContext& ctx);

/// Random expressions over the attribute pool of `Sandbox`. With
/// `well_typed` the generator follows the static types (faults can still
/// occur: division by zero, absent roots); otherwise operands are mixed
/// freely.
struct ExprGenOptions {
  int max_depth = 5;
  bool well_typed = true;
  bool allow_division = true;
  bool allow_target = true;
  bool allow_named_roots = true;  // Plant, Ghost (absent), Twin (ambiguous)
};

class ExprGen {
 public:
  explicit ExprGen(std::uint64_t seed, ExprGenOptions opts = {}) : rng_(seed), opts_(opts) {}

  expr::ExprPtr any();
  expr::ExprPtr of_type(char kind);  // 'i', 'f', 'b', 's'
  std::mt19937_64& rng() { return rng_; }

 private:
  expr::ExprPtr gen(char kind, int depth);
  expr::ExprPtr leaf(char kind);
  expr::Value literal(char kind);
  std::string root();
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  std::mt19937_64 rng_;
  ExprGenOptions opts_;
};

/// Three elements with attributes i, j (Int), x, y (Float), b (Bool),
/// s (String) and a resolver for the named roots used by ExprGen.
struct Sandbox {
  meta::ModelElement source;
  meta::ModelElement target;
  meta::ModelElement self;
  meta::ModelElement plant;

  void randomize(std::mt19937_64& rng);
  expr::EvalContext context() const;
};

/// Parser accepting only the fully parenthesized print style: every unary
/// and binary node is wrapped, so no precedence table is needed.
expr::ExprPtr parse_parenthesized(std::string_view text);

/// Direct projection of `runtime` through `rules`, computed from scratch with
/// reference_eval. Mappings must not read `target`; predicates and mappings
/// are expected to be fault-free.
meta::Model project(const meta::Model& runtime, const mapping::RuleSet& rules,
                    std::shared_ptr<const meta::Metamodel> scenario_mm);

/// Exact comparison except Floats, which may differ by `tolerance`. On
/// mismatch `why` names the first difference.
bool models_match(const meta::Model& a, const meta::Model& b, double tolerance,
                  std::string* why = nullptr);

}  // namespace rtm::oracle
