#include "rtm/scenario/definition.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "rtm/expr/parser.hpp"
#include "rtm/expr/typecheck.hpp"
#include "rtm/meta/metamodel_text.hpp"
#include "rtm/xml/xml.hpp"

namespace rtm::scenario {

std::string_view to_string(NotifySeverity s) { return s == NotifySeverity::Info ? "info" : "warning"; }

std::string_view to_string(ScenarioErrc code) {
  switch (code) {
    case ScenarioErrc::ParseError: return "ParseError";
    case ScenarioErrc::ValidationFailed: return "ValidationFailed";
    case ScenarioErrc::CardinalityViolation: return "CardinalityViolation";
    case ScenarioErrc::NoRecognizer: return "NoRecognizer";
  }
  return "ScenarioError";
}

namespace {

std::string first_message(ScenarioErrc code, const std::vector<Diagnostic>& diags) {
  std::string msg(to_string(code));
  if (!diags.empty()) msg += ": " + diags.front().format();
  return msg;
}

}  // namespace

ScenarioError::ScenarioError(ScenarioErrc code, std::vector<Diagnostic> diags)
    : Error(first_message(code, diags)), code_(code), diags_(std::move(diags)) {}

namespace {

class Reader {
 public:
  explicit Reader(std::string file) : file_(std::move(file)) {}

  SourceLocation at(const xml::Element& el) const { return {file_, el.line, el.column, {}}; }
  SourceLocation at(const xml::Attribute& a) const { return {file_, a.line, a.column, {}}; }

  [[noreturn]] void fail(SourceLocation where, std::string message) const {
    throw ScenarioError(ScenarioErrc::ParseError,
                        {{Severity::Error, std::move(where), {}, std::move(message)}});
  }

  void allow_only(const xml::Element& el, std::initializer_list<std::string_view> names) const {
    for (const auto& a : el.attributes) {
      if (std::find(names.begin(), names.end(), a.name) == names.end()) {
        fail(at(a), "<" + el.name + "> has no attribute '" + a.name + "'");
      }
    }
  }

  const xml::Attribute& required(const xml::Element& el, std::string_view name) const {
    const xml::Attribute* a = el.attribute(name);
    if (!a) fail(at(el), "<" + el.name + "> requires attribute '" + std::string(name) + "'");
    return *a;
  }

  void no_text(const xml::Element& el) const {
    if (el.text.find_first_not_of(" \t\r\n") != std::string::npos) {
      fail({file_, el.text_line, 1, {}}, "unexpected text inside <" + el.name + ">");
    }
  }

  void no_children(const xml::Element& el) const {
    if (!el.children.empty()) {
      fail(at(el.children.front()), "<" + el.name + "> takes no child elements");
    }
    no_text(el);
  }

  expr::ExprPtr expression(const xml::Attribute& a, std::string_view text, std::size_t offset) const {
    try {
      return expr::parse_expr(text);
    } catch (const expr::SyntaxError& e) {
      auto [line, col] = xml::position_in(a, offset + e.position());
      fail({file_, line, col, {}}, e.message());
    }
  }

  expr::ExprPtr expression(const xml::Attribute& a) const { return expression(a, a.value, 0); }

  /// "Class.attr" with both parts non-empty.
  std::pair<std::string, std::string> target(const xml::Attribute& a) const {
    auto dot = a.value.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == a.value.size() ||
        a.value.find('.', dot + 1) != std::string::npos) {
      fail(at(a), "target must have the form Class.attribute");
    }
    return {a.value.substr(0, dot), a.value.substr(dot + 1)};
  }

  std::vector<TemplatePart> message(const xml::Attribute& a) const {
    std::vector<TemplatePart> parts;
    const std::string& s = a.value;
    std::size_t i = 0;
    std::string text;
    while (i < s.size()) {
      if (s[i] == '}') fail(at(a), "unmatched '}' in message");
      if (s[i] != '{') {
        text += s[i++];
        continue;
      }
      std::size_t close = s.find('}', i + 1);
      if (close == std::string::npos) {
        auto [line, col] = xml::position_in(a, i);
        fail({file_, line, col, {}}, "unclosed '{' in message");
      }
      if (!text.empty()) parts.push_back({std::move(text), nullptr});
      text.clear();
      parts.push_back({{}, expression(a, std::string_view(s).substr(i + 1, close - i - 1), i + 1)});
      i = close + 1;
    }
    if (!text.empty()) parts.push_back({std::move(text), nullptr});
    return parts;
  }

  int integer(const xml::Attribute& a) const {
    int v = 0;
    auto [p, ec] = std::from_chars(a.value.data(), a.value.data() + a.value.size(), v);
    if (ec != std::errc() || p != a.value.data() + a.value.size() || v < 0) {
      fail(at(a), "expected a non-negative integer, found '" + a.value + "'");
    }
    return v;
  }

  std::vector<Action> actions(const xml::Element& parent) const {
    std::vector<Action> out;
    for (const auto& c : parent.children) {
      Action act;
      act.where = at(c);
      if (c.name == "set") {
        allow_only(c, {"target", "expr"});
        act.kind = Action::Kind::Set;
        std::tie(act.target_class, act.target_attr) = target(required(c, "target"));
        act.expr = expression(required(c, "expr"));
      } else if (c.name == "notify") {
        allow_only(c, {"severity", "message"});
        act.kind = Action::Kind::Notify;
        if (const auto* sev = c.attribute("severity")) {
          if (sev->value == "info") act.severity = NotifySeverity::Info;
          else if (sev->value == "warning") act.severity = NotifySeverity::Warning;
          else fail(at(*sev), "severity must be info or warning");
        }
        act.message = message(required(c, "message"));
      } else {
        fail(at(c), "unknown element <" + c.name + "> in <" + parent.name + ">");
      }
      no_children(c);
      out.push_back(std::move(act));
    }
    no_text(parent);
    return out;
  }

  const std::string& file() const { return file_; }

 private:
  std::string file_;
};

ActionRule read_rule(const Reader& rd, const xml::Element& el) {
  rd.allow_only(el, {"id", "when", "trigger", "measure", "on", "off"});
  ActionRule r;
  r.where = rd.at(el);
  r.id = rd.required(el, "id").value;
  const auto* when = el.attribute("when");
  const auto* measure = el.attribute("measure");
  const auto* on = el.attribute("on");
  const auto* off = el.attribute("off");
  const bool band = measure || on || off;
  if (band) {
    if (when) rd.fail(rd.at(*when), "a rule has either when or measure/on/off");
    r.hysteresis = Hysteresis{rd.expression(rd.required(el, "measure")),
                              rd.expression(rd.required(el, "on")),
                              rd.expression(rd.required(el, "off"))};
  } else {
    r.when = rd.expression(rd.required(el, "when"));
  }
  if (const auto* t = el.attribute("trigger")) {
    if (t->value == "level") r.trigger = Trigger::Level;
    else if (t->value == "edge") r.trigger = Trigger::Edge;
    else rd.fail(rd.at(*t), "trigger must be level or edge");
    if (band) rd.fail(rd.at(*t), "hysteresis rules take no trigger");
  }
  bool seen_then = false;
  bool seen_else = false;
  for (const auto& c : el.children) {
    if (c.name == "then" && !seen_then) {
      rd.allow_only(c, {});
      r.then = rd.actions(c);
      seen_then = true;
    } else if (c.name == "else" && !seen_else) {
      rd.allow_only(c, {});
      r.otherwise = rd.actions(c);
      seen_else = true;
    } else {
      rd.fail(rd.at(c), "unexpected <" + c.name + "> in <rule>");
    }
  }
  rd.no_text(el);
  return r;
}

StateMachineDef read_machine(const Reader& rd, const xml::Element& el) {
  rd.allow_only(el, {"id", "initial"});
  StateMachineDef m;
  m.where = rd.at(el);
  m.id = rd.required(el, "id").value;
  m.initial = rd.required(el, "initial").value;
  for (const auto& c : el.children) {
    if (c.name == "state") {
      rd.allow_only(c, {"name"});
      rd.no_children(c);
      m.states.push_back(rd.required(c, "name").value);
    } else if (c.name == "transition") {
      rd.allow_only(c, {"from", "to", "guard"});
      Transition t;
      t.where = rd.at(c);
      t.from = rd.required(c, "from").value;
      t.to = rd.required(c, "to").value;
      if (const auto* g = c.attribute("guard")) t.guard = rd.expression(*g);
      t.actions = rd.actions(c);
      m.transitions.push_back(std::move(t));
    } else {
      rd.fail(rd.at(c), "unknown element <" + c.name + "> in <stateMachine>");
    }
  }
  rd.no_text(el);
  return m;
}

}  // namespace

ScenarioDef parse_scenario(std::string_view document, const std::string& file) {
  Reader rd(file);
  xml::Element root;
  try {
    root = xml::parse(document);
  } catch (const xml::XmlError& e) {
    rd.fail({file, e.line(), e.column(), {}}, "XmlMalformed: " + e.message());
  }
  if (root.name != "scenario") rd.fail(rd.at(root), "expected <scenario>, found <" + root.name + ">");
  rd.allow_only(root, {"name"});
  rd.no_text(root);

  ScenarioDef def;
  def.file = file;
  if (const auto* n = root.attribute("name")) def.name = n->value;
  for (const auto& c : root.children) {
    if (c.name == "metamodel") {
      if (def.metamodel) rd.fail(rd.at(c), "second <metamodel>");
      rd.allow_only(c, {});
      if (!c.children.empty()) rd.fail(rd.at(c.children.front()), "<metamodel> holds text only");
      try {
        def.metamodel = meta::parse_metamodel(c.text, def.name.empty() ? "scenario" : def.name,
                                              c.text_line > 0 ? c.text_line : c.line);
      } catch (const meta::MetamodelTextError& e) {
        rd.fail({file, e.line(), e.column(), {}}, e.message());
      } catch (const meta::ModelError& e) {
        rd.fail(rd.at(c), e.what());
      }
    } else if (c.name == "cardinality") {
      rd.allow_only(c, {"class", "min", "max"});
      rd.no_children(c);
      Cardinality card;
      card.where = rd.at(c);
      card.class_name = rd.required(c, "class").value;
      if (const auto* mn = c.attribute("min")) card.min = rd.integer(*mn);
      if (const auto* mx = c.attribute("max"); mx && mx->value != "*") card.max = rd.integer(*mx);
      def.cardinalities.push_back(std::move(card));
    } else if (c.name == "element") {
      rd.allow_only(c, {"id", "class"});
      ElementDecl decl;
      decl.where = rd.at(c);
      decl.id = rd.required(c, "id").value;
      if (decl.id.empty()) rd.fail(rd.at(c), "empty element id");
      decl.class_name = rd.required(c, "class").value;
      for (const auto& v : c.children) {
        if (v.name != "value") rd.fail(rd.at(v), "unknown element <" + v.name + "> in <element>");
        rd.allow_only(v, {"attr", "expr"});
        rd.no_children(v);
        decl.values.emplace_back(rd.required(v, "attr").value, rd.expression(rd.required(v, "expr")));
      }
      rd.no_text(c);
      def.elements.push_back(std::move(decl));
    } else if (c.name == "rule") {
      def.rules.push_back(read_rule(rd, c));
    } else if (c.name == "stateMachine") {
      def.machines.push_back(read_machine(rd, c));
    } else {
      rd.fail(rd.at(c), "unknown element <" + c.name + "> in <scenario>");
    }
  }
  if (!def.metamodel) rd.fail(rd.at(root), "<scenario> requires a <metamodel>");
  return def;
}

std::vector<Diagnostic> validate(const ScenarioDef& def) {
  std::vector<Diagnostic> out;
  const meta::Metamodel& mm = *def.metamodel;
  auto report = [&](const SourceLocation& where, const std::string& subject, std::string msg) {
    out.push_back({Severity::Error, where, subject, std::move(msg)});
  };
  expr::TypeEnv env;
  env.named = [&](std::string_view root) { return mm.find(root); };

  auto typed = [&](const expr::ExprPtr& e, const SourceLocation& where,
                   const std::string& subject) -> std::optional<expr::Type> {
    auto res = expr::check(*e, env);
    for (const auto& issue : res.issues) report(where, subject, issue.message);
    return res.ok() ? res.type : std::nullopt;
  };
  auto expect = [&](const expr::ExprPtr& e, const SourceLocation& where, const std::string& subject,
                    std::initializer_list<expr::Type> allowed, std::string_view what) {
    auto t = typed(e, where, subject);
    if (t && std::find(allowed.begin(), allowed.end(), *t) == allowed.end()) {
      report(where, subject, std::string(what) + " has type " + std::string(expr::to_string(*t)));
    }
  };
  auto check_actions = [&](const std::vector<Action>& acts, const std::string& subject) {
    for (const auto& a : acts) {
      if (a.kind == Action::Kind::Notify) {
        for (const auto& p : a.message) {
          if (p.expr) typed(p.expr, a.where, subject);
        }
        continue;
      }
      const meta::MetaClass* cls = mm.find(a.target_class);
      if (!cls) {
        report(a.where, subject, "unknown class '" + a.target_class + "'");
        continue;
      }
      const meta::AttributeDef* attr = cls->attribute(a.target_attr);
      if (!attr) {
        report(a.where, subject, "class " + cls->name + " has no attribute '" + a.target_attr + "'");
        continue;
      }
      if (!attr->writable) report(a.where, subject, cls->name + "." + attr->name + " is read-only");
      if (auto t = typed(a.expr, a.where, subject); t && !expr::assignable(*t, attr->type)) {
        report(a.where, subject,
               "cannot assign " + std::string(expr::to_string(*t)) + " to " + cls->name + "." +
                   attr->name + " (" + meta::type_name(attr->type) + ")");
      }
    }
  };

  std::set<std::string> seen;
  for (const auto& c : def.cardinalities) {
    if (!mm.find(c.class_name)) report(c.where, c.class_name, "unknown class '" + c.class_name + "'");
    if (!seen.insert(c.class_name).second) report(c.where, c.class_name, "second bound for the class");
    if (c.max && *c.max < c.min) report(c.where, c.class_name, "max is below min");
  }

  seen.clear();
  for (const auto& e : def.elements) {
    if (!seen.insert(e.id).second) report(e.where, e.id, "element id reused");
    const meta::MetaClass* cls = mm.find(e.class_name);
    if (!cls) {
      report(e.where, e.id, "unknown class '" + e.class_name + "'");
      continue;
    }
    for (const auto& [attr, ex] : e.values) {
      const meta::AttributeDef* def_attr = cls->attribute(attr);
      if (!def_attr) {
        report(e.where, e.id, "class " + cls->name + " has no attribute '" + attr + "'");
        continue;
      }
      if (auto t = typed(ex, e.where, e.id); t && !expr::assignable(*t, def_attr->type)) {
        report(e.where, e.id, "cannot assign " + std::string(expr::to_string(*t)) + " to " + attr);
      }
    }
  }

  seen.clear();
  for (const auto& r : def.rules) {
    if (!seen.insert(r.id).second) report(r.where, r.id, "rule id reused");
    if (r.when) expect(r.when, r.where, r.id, {expr::Type::Bool}, "condition");
    if (r.hysteresis) {
      const auto num = {expr::Type::Int, expr::Type::Float};
      expect(r.hysteresis->measure, r.where, r.id, num, "measure");
      expect(r.hysteresis->on, r.where, r.id, num, "on threshold");
      expect(r.hysteresis->off, r.where, r.id, num, "off threshold");
    }
    check_actions(r.then, r.id);
    check_actions(r.otherwise, r.id);
  }

  for (const auto& m : def.machines) {
    if (!seen.insert(m.id).second) report(m.where, m.id, "behavior id reused");
    std::set<std::string> states;
    for (const auto& s : m.states) {
      if (!states.insert(s).second) report(m.where, m.id, "state '" + s + "' declared twice");
    }
    if (!states.count(m.initial)) report(m.where, m.id, "initial state '" + m.initial + "' is not declared");
    for (const auto& t : m.transitions) {
      if (!states.count(t.from)) report(t.where, m.id, "unknown state '" + t.from + "'");
      if (!states.count(t.to)) report(t.where, m.id, "unknown state '" + t.to + "'");
      if (t.guard) expect(t.guard, t.where, m.id, {expr::Type::Bool}, "guard");
      check_actions(t.actions, m.id);
    }
  }
  return out;
}

std::vector<Diagnostic> check_cardinality(const ScenarioDef& def, const meta::Model& model,
                                          bool upper_only) {
  std::vector<Diagnostic> out;
  for (const auto& c : def.cardinalities) {
    const auto n = static_cast<int>(model.elements_of(c.class_name).size());
    const bool over = c.max && n > *c.max;
    const bool under = !upper_only && n < c.min;
    if (!over && !under) continue;
    std::string bounds = std::to_string(c.min) + ".." + (c.max ? std::to_string(*c.max) : "*");
    out.push_back({Severity::Error, c.where, c.class_name,
                   "CardinalityViolation: " + std::to_string(n) + " " + c.class_name +
                       " element(s), expected " + bounds});
  }
  return out;
}

}  // namespace rtm::scenario
