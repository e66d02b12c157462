#include "rtm/mapping/rules.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "rtm/expr/parser.hpp"
#include "rtm/expr/typecheck.hpp"
#include "rtm/xml/xml.hpp"

namespace rtm::mapping {

std::string_view to_string(Direction d) {
  return d == Direction::ToScenario ? "toScenario" : "bidirectional";
}

std::string_view to_string(RuleErrc code) {
  switch (code) {
    case RuleErrc::XmlMalformed: return "XmlMalformed";
    case RuleErrc::UnknownElementTag: return "UnknownElementTag";
    case RuleErrc::MissingAttribute: return "MissingAttribute";
    case RuleErrc::UnexpectedAttribute: return "UnexpectedAttribute";
    case RuleErrc::InvalidValue: return "InvalidValue";
    case RuleErrc::DuplicateRuleId: return "DuplicateRuleId";
    case RuleErrc::ExprSyntax: return "ExprSyntax";
  }
  return "RuleParseError";
}

RuleParseError::RuleParseError(RuleErrc code, SourceLocation where, const std::string& what)
    : Error(std::string(to_string(code)) + " at " + std::to_string(where.line) + ":" +
            std::to_string(where.column) + ": " + what),
      code_(code),
      where_(std::move(where)),
      message_(what) {}

Diagnostic RuleParseError::diagnostic() const {
  return {Severity::Error, where_, {}, std::string(to_string(code_)) + ": " + message_};
}

const MappingRule* RuleSet::find(std::string_view id) const {
  auto it = std::find_if(rules.begin(), rules.end(),
                         [&](const MappingRule& r) { return r.id == id; });
  return it == rules.end() ? nullptr : &*it;
}

bool equivalent(const RuleSet& a, const RuleSet& b) {
  auto same_rule = [](const MappingRule& x, const MappingRule& y) {
    if (x.id != y.id || x.source_class != y.source_class || x.target_class != y.target_class ||
        x.direction != y.direction || !expr::equal(x.predicate, y.predicate)) {
      return false;
    }
    bool attrs = std::equal(x.attrs.begin(), x.attrs.end(), y.attrs.begin(), y.attrs.end(),
                            [](const AttrMapping& p, const AttrMapping& q) {
                              return p.target == q.target && expr::equal(p.expr, q.expr);
                            });
    bool wbs = std::equal(x.writebacks.begin(), x.writebacks.end(), y.writebacks.begin(),
                          y.writebacks.end(), [](const Writeback& p, const Writeback& q) {
                            return p.source == q.source && p.target == q.target;
                          });
    return attrs && wbs;
  };
  return std::equal(a.rules.begin(), a.rules.end(), b.rules.begin(), b.rules.end(), same_rule);
}

namespace {

class DocumentReader {
 public:
  explicit DocumentReader(std::string file) : file_(std::move(file)) {}

  SourceLocation at(const xml::Element& el) const { return {file_, el.line, el.column, {}}; }
  SourceLocation at(const xml::Attribute& a) const { return {file_, a.line, a.column, {}}; }

  void allow_only(const xml::Element& el, std::initializer_list<std::string_view> names) const {
    for (const auto& a : el.attributes) {
      if (std::find(names.begin(), names.end(), a.name) == names.end()) {
        throw RuleParseError(RuleErrc::UnexpectedAttribute, at(a),
                             "<" + el.name + "> has no attribute '" + a.name + "'");
      }
    }
  }

  const xml::Attribute& required(const xml::Element& el, std::string_view name) const {
    const xml::Attribute* a = el.attribute(name);
    if (!a) {
      throw RuleParseError(RuleErrc::MissingAttribute, at(el),
                           "<" + el.name + "> requires attribute '" + std::string(name) + "'");
    }
    return *a;
  }

  expr::ExprPtr expression(const xml::Attribute& a) const {
    try {
      return expr::parse_expr(a.value);
    } catch (const expr::SyntaxError& e) {
      auto [line, col] = xml::position_in(a, e.position());
      throw RuleParseError(RuleErrc::ExprSyntax, {file_, line, col, {}}, e.message());
    }
  }

  void no_text(const xml::Element& el) const {
    if (el.text.find_first_not_of(" \t\r\n") != std::string::npos) {
      throw RuleParseError(RuleErrc::InvalidValue, {file_, el.text_line, 1, {}},
                           "unexpected text inside <" + el.name + ">");
    }
  }

 private:
  std::string file_;
};

}  // namespace

RuleSet parse_rules(std::string_view document, const std::string& file) {
  xml::Element root;
  try {
    root = xml::parse(document);
  } catch (const xml::XmlError& e) {
    throw RuleParseError(RuleErrc::XmlMalformed, {file, e.line(), e.column(), {}}, e.message());
  }
  DocumentReader rd(file);
  if (root.name != "mappings") {
    throw RuleParseError(RuleErrc::UnknownElementTag, rd.at(root),
                         "expected <mappings>, found <" + root.name + ">");
  }
  rd.allow_only(root, {});
  rd.no_text(root);

  RuleSet set;
  std::set<std::string> ids;
  for (const auto& map : root.children) {
    if (map.name != "map") {
      throw RuleParseError(RuleErrc::UnknownElementTag, rd.at(map),
                           "unknown element <" + map.name + "> in <mappings>");
    }
    rd.allow_only(map, {"id", "source", "where", "target", "direction"});
    rd.no_text(map);
    MappingRule rule;
    rule.where = rd.at(map);
    const auto& id = rd.required(map, "id");
    rule.id = id.value;
    if (rule.id.empty()) throw RuleParseError(RuleErrc::InvalidValue, rd.at(id), "empty rule id");
    if (!ids.insert(rule.id).second) {
      throw RuleParseError(RuleErrc::DuplicateRuleId, rd.at(id), "rule id '" + rule.id + "' reused");
    }
    const auto& source = rd.required(map, "source");
    const auto& target = rd.required(map, "target");
    rule.source_class = source.value;
    rule.target_class = target.value;
    rule.source_where = rd.at(source);
    rule.target_where = rd.at(target);
    if (const auto* where = map.attribute("where")) {
      rule.predicate = rd.expression(*where);
      rule.predicate_where = rd.at(*where);
    }
    if (const auto* dir = map.attribute("direction")) {
      if (dir->value == "toScenario") rule.direction = Direction::ToScenario;
      else if (dir->value == "bidirectional") rule.direction = Direction::Bidirectional;
      else {
        throw RuleParseError(RuleErrc::InvalidValue, rd.at(*dir),
                             "direction must be toScenario or bidirectional");
      }
    }
    for (const auto& child : map.children) {
      if (child.name == "attr") {
        rd.allow_only(child, {"target", "expr"});
        const auto& target = rd.required(child, "target");
        const auto& ex = rd.required(child, "expr");
        rule.attrs.push_back({target.value, rd.expression(ex), rd.at(child)});
      } else if (child.name == "writeback") {
        rd.allow_only(child, {"source", "target"});
        rule.writebacks.push_back({rd.required(child, "source").value,
                                   rd.required(child, "target").value, rd.at(child)});
      } else {
        throw RuleParseError(RuleErrc::UnknownElementTag, rd.at(child),
                             "unknown element <" + child.name + "> in <map>");
      }
      rd.no_text(child);
    }
    set.rules.push_back(std::move(rule));
  }
  return set;
}

std::vector<Diagnostic> validate(const RuleSet& rules, const meta::Metamodel& runtime,
                                 const meta::Metamodel& scenario) {
  std::vector<Diagnostic> out;
  auto report = [&](const MappingRule& r, const SourceLocation& where, std::string msg,
                    Severity sev = Severity::Error) {
    out.push_back({sev, where, r.id, std::move(msg)});
  };
  auto report_expr = [&](const MappingRule& r, const SourceLocation& where,
                         const std::vector<expr::TypeIssue>& issues) {
    for (const auto& i : issues) report(r, where, i.message);
  };

  for (const auto& rule : rules.rules) {
    const meta::MetaClass* source = runtime.find(rule.source_class);
    const meta::MetaClass* target = scenario.find(rule.target_class);
    auto located = [&](const SourceLocation& w) { return w.known() ? w : rule.where; };
    if (!source) {
      report(rule, located(rule.source_where), "unknown runtime class '" + rule.source_class + "'");
    }
    if (!target) {
      report(rule, located(rule.target_where), "unknown scenario class '" + rule.target_class + "'");
    }
    if (!source || !target) continue;

    expr::TypeEnv env;
    env.source = source;
    env.self = source;
    if (rule.predicate) {
      auto res = expr::check(*rule.predicate, env);
      if (!res.ok()) {
        report_expr(rule, rule.predicate_where, res.issues);
      } else if (*res.type != expr::Type::Bool) {
        report(rule, rule.predicate_where,
               "where-clause must be Bool, got " + std::string(expr::to_string(*res.type)));
      }
    }

    env.target = target;
    std::set<std::string> mapped;
    for (const auto& m : rule.attrs) {
      const meta::AttributeDef* def = target->attribute(m.target);
      if (!def) {
        report(rule, m.where, "class " + target->name + " has no attribute '" + m.target + "'");
        continue;
      }
      if (!mapped.insert(m.target).second) {
        report(rule, m.where, "attribute '" + m.target + "' mapped twice; the later mapping wins",
               Severity::Warning);
      }
      auto res = expr::check(*m.expr, env);
      if (!res.ok()) {
        report_expr(rule, m.where, res.issues);
      } else if (!expr::assignable(*res.type, def->type)) {
        report(rule, m.where,
               "cannot assign " + std::string(expr::to_string(*res.type)) + " to " +
                   target->name + "." + m.target + " (" + meta::type_name(def->type) + ")");
      }
    }

    for (const auto& wb : rule.writebacks) {
      if (rule.direction != Direction::Bidirectional) {
        report(rule, wb.where, "writeback requires direction=\"bidirectional\"");
      }
      const meta::AttributeDef* src = source->attribute(wb.source);
      const meta::AttributeDef* tgt = target->attribute(wb.target);
      if (!src) report(rule, wb.where, "class " + source->name + " has no attribute '" + wb.source + "'");
      if (!tgt) report(rule, wb.where, "class " + target->name + " has no attribute '" + wb.target + "'");
      if (!src || !tgt) continue;
      if (!src->writable) {
        report(rule, wb.where, source->name + "." + wb.source + " is read-only on the device");
      }
      if (expr::expr_type_of(src->type) != expr::expr_type_of(tgt->type)) {
        report(rule, wb.where, "writeback pair types differ: " + meta::type_name(src->type) +
                                   " vs " + meta::type_name(tgt->type));
      }
    }
  }
  return out;
}

namespace {

std::string escape_attr(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string serialize_rules(const RuleSet& rules) {
  std::ostringstream out;
  out << "<mappings>\n";
  for (const auto& r : rules.rules) {
    out << "  <map id=\"" << escape_attr(r.id) << "\" source=\"" << escape_attr(r.source_class)
        << '"';
    if (r.predicate) out << " where=\"" << escape_attr(expr::print_expr(r.predicate)) << '"';
    out << " target=\"" << escape_attr(r.target_class) << "\" direction=\"" << to_string(r.direction)
        << "\">\n";
    for (const auto& m : r.attrs) {
      out << "    <attr target=\"" << escape_attr(m.target) << "\" expr=\""
          << escape_attr(expr::print_expr(m.expr)) << "\"/>\n";
    }
    for (const auto& w : r.writebacks) {
      out << "    <writeback source=\"" << escape_attr(w.source) << "\" target=\""
          << escape_attr(w.target) << "\"/>\n";
    }
    out << "  </map>\n";
  }
  out << "</mappings>\n";
  return out.str();
}

}  // namespace rtm::mapping
