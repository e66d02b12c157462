#include "rtm/scenario/engine.hpp"

#include <cmath>

namespace rtm::scenario {

using meta::ChangeEvent;
using meta::Origin;

namespace {

double as_number(const meta::Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw expr::EvalError(expr::EvalErrc::TypeError, "expected a number");
}

bool as_bool(const meta::Value& v) {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw expr::EvalError(expr::EvalErrc::TypeError, "expected Bool");
}

std::string render(const meta::Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return meta::format_value(v);
}

}  // namespace

ScenarioEngine::ScenarioEngine(ScenarioDef def, meta::Model& model)
    : def_(std::move(def)), model_(model) {
  if (!(model_.metamodel() == *def_.metamodel)) {
    throw meta::ModelError(meta::ModelErrc::MetamodelMismatch, "scenario model over another metamodel");
  }
  if (auto diags = validate(def_); has_errors(diags)) {
    throw ScenarioError(ScenarioErrc::ValidationFailed, std::move(diags));
  }
  std::vector<Diagnostic> faults;
  for (const auto& decl : def_.elements) {
    meta::AttrMap initial;
    try {
      for (const auto& [attr, e] : decl.values) initial[attr] = evaluate(e);
      load_events_.push_back(model_.instantiate(decl.class_name, decl.id, std::move(initial),
                                                Origin::ScenarioEngine));
    } catch (const Error& e) {
      faults.push_back({Severity::Error, decl.where, decl.id, e.what()});
    }
  }
  if (!faults.empty()) throw ScenarioError(ScenarioErrc::ValidationFailed, std::move(faults));
  if (auto over = check_cardinality(def_, model_, true); !over.empty()) {
    throw ScenarioError(ScenarioErrc::CardinalityViolation, std::move(over));
  }
  for (const auto& m : def_.machines) states_[m.id] = m.initial;
  for (const auto& r : def_.rules) latched_[r.id] = false;
}

expr::EvalContext ScenarioEngine::context() const {
  expr::EvalContext ctx;
  ctx.resolve = [this](std::string_view root) -> const meta::ModelElement* {
    auto found = model_.elements_of(root);
    if (found.size() > 1) {
      throw expr::EvalError(expr::EvalErrc::Ambiguous,
                            std::to_string(found.size()) + " " + std::string(root) + " elements");
    }
    return found.empty() ? nullptr : found.front();
  };
  return ctx;
}

const expr::Program& ScenarioEngine::program(const expr::ExprPtr& e) {
  auto it = programs_.find(e.get());
  if (it == programs_.end()) it = programs_.emplace(e.get(), expr::Program::compile(*e)).first;
  return it->second;
}

meta::Value ScenarioEngine::evaluate(const expr::ExprPtr& e) { return program(e).run(context()); }

void ScenarioEngine::fault(const SourceLocation& where, const std::string& owner,
                           const std::string& what, BehaviorResult& out) {
  out.diagnostics.push_back({Severity::Error, where, owner, "EvalFault: " + what});
}

void ScenarioEngine::run(const std::vector<Action>& actions, const std::string& owner,
                         double sim_time, BehaviorResult& out) {
  for (const auto& a : actions) {
    try {
      if (a.kind == Action::Kind::Notify) {
        std::string text;
        for (const auto& p : a.message) text += p.expr ? render(evaluate(p.expr)) : p.text;
        out.notifications.push_back({sim_time, std::move(text), a.severity, owner});
        continue;
      }
      meta::Value v = evaluate(a.expr);
      for (const auto* el : model_.elements_of(a.target_class)) {
        if (auto ev = model_.set_attribute(el->id, a.target_attr, v, Origin::ScenarioEngine)) {
          out.events.push_back(std::move(*ev));
        }
      }
    } catch (const Error& e) {
      fault(a.where, owner, e.what(), out);
    }
  }
}

BehaviorResult ScenarioEngine::step_behavior(double sim_time) {
  BehaviorResult out;
  for (const auto& m : def_.machines) {
    std::string& current = states_[m.id];
    for (const auto& t : m.transitions) {
      if (t.from != current) continue;
      bool enabled = true;
      if (t.guard) {
        try {
          enabled = as_bool(evaluate(t.guard));
        } catch (const Error& e) {
          fault(t.where, m.id, e.what(), out);
          continue;
        }
      }
      if (!enabled) continue;
      run(t.actions, m.id, sim_time, out);
      current = t.to;
      out.transitions.emplace_back(m.id, t.to);
      break;
    }
  }

  for (const auto& r : def_.rules) {
    bool& latch = latched_[r.id];
    try {
      if (r.hysteresis) {
        const double measure = as_number(evaluate(r.hysteresis->measure));
        const double on = as_number(evaluate(r.hysteresis->on));
        const double off = as_number(evaluate(r.hysteresis->off));
        if (on == off || std::isnan(on) || std::isnan(off)) {
          throw expr::EvalError(expr::EvalErrc::TypeError, "on and off thresholds must differ");
        }
        const bool low = on < off;
        if (!latch && (low ? measure < on : measure > on)) latch = true;
        else if (latch && (low ? measure > off : measure < off)) latch = false;
        run(latch ? r.then : r.otherwise, r.id, sim_time, out);
      } else if (r.trigger == Trigger::Level) {
        const bool cond = as_bool(evaluate(r.when));
        latch = cond;
        run(cond ? r.then : r.otherwise, r.id, sim_time, out);
      } else {
        const bool cond = as_bool(evaluate(r.when));
        const bool was = latch;
        latch = cond;
        if (cond && !was) run(r.then, r.id, sim_time, out);
        if (!cond && was) run(r.otherwise, r.id, sim_time, out);
      }
    } catch (const Error& e) {
      fault(r.where, r.id, e.what(), out);
    }
  }
  return out;
}

std::vector<ChangeEvent> ScenarioEngine::set_plant_name(std::string_view name) {
  auto recognizers = model_.elements_of("Recognizer");
  if (recognizers.empty()) {
    throw ScenarioError(ScenarioErrc::NoRecognizer,
                        {{Severity::Error, {}, "Recognizer", "the scenario has no Recognizer element"}});
  }
  std::vector<ChangeEvent> out;
  for (const auto* r : recognizers) {
    if (auto ev = model_.set_attribute(r->id, "plantName", std::string(name), Origin::Console)) {
      out.push_back(std::move(*ev));
    }
  }
  return out;
}

std::vector<ChangeEvent> ScenarioEngine::console_set(std::string_view element_id,
                                                     std::string_view attr,
                                                     const meta::Value& value) {
  std::vector<ChangeEvent> out;
  if (auto ev = model_.set_attribute(element_id, attr, value, Origin::Console)) {
    out.push_back(std::move(*ev));
  }
  return out;
}

const std::string& ScenarioEngine::state(std::string_view machine_id) const {
  auto it = states_.find(machine_id);
  if (it == states_.end()) throw Error("no state machine '" + std::string(machine_id) + "'");
  return it->second;
}

bool ScenarioEngine::latched(std::string_view rule_id) const {
  auto it = latched_.find(rule_id);
  return it != latched_.end() && it->second;
}

}  // namespace rtm::scenario
