#include "rtm/sync/synchronizer.hpp"

#include <algorithm>

#include "rtm/expr/typecheck.hpp"

namespace rtm::sync {

using meta::ChangeEvent;
using meta::ChangeKind;
using meta::Origin;

std::string scenario_id_for(std::string_view rule_id, std::string_view runtime_id) {
  std::string id(rule_id);
  id += '@';
  id += runtime_id;
  return id;
}

void SyncResult::merge(SyncResult other) {
  auto move_into = [](auto& dst, auto& src) {
    dst.insert(dst.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end()));
  };
  move_into(scenario_events, other.scenario_events);
  move_into(runtime_events, other.runtime_events);
  move_into(writes, other.writes);
  move_into(diagnostics, other.diagnostics);
  version_at_end = other.version_at_end;
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diags) {
  std::string msg = "rule set failed validation";
  for (const auto& d : diags) {
    if (d.severity == Severity::Error) return msg + ": " + d.format();
  }
  return msg;
}

void append(std::vector<ChangeEvent>& dst, std::vector<ChangeEvent> src) {
  dst.insert(dst.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end()));
}

}  // namespace

ValidationFailed::ValidationFailed(std::vector<Diagnostic> diags)
    : Error(summarize(diags)), diags_(std::move(diags)) {}

Synchronizer::Synchronizer(meta::Model& runtime, meta::Model& scenario,
                           runtime::DeviceWriter& writer)
    : runtime_(runtime), scenario_(scenario), writer_(writer) {}

void Synchronizer::compile() {
  compiled_.clear();
  for (const auto& rule : rules_.rules) {
    CompiledRule cr{&rule, std::nullopt, {}};
    if (rule.predicate) cr.predicate = expr::Program::compile(*rule.predicate);
    for (const auto& m : rule.attrs) {
      std::set<std::string> src;
      for (const auto& [root, attr] : expr::reads(*m.expr)) {
        if (root == "source" || root == "self") src.insert(attr);
      }
      cr.maps.push_back({&m, expr::Program::compile(*m.expr), std::move(src)});
    }
    compiled_.push_back(std::move(cr));
  }
}

std::vector<Binding> Synchronizer::bindings() const {
  std::vector<Binding> out;
  for (const auto& [key, sid] : bindings_) out.push_back({key.first, key.second, sid});
  return out;
}

std::optional<Binding> Synchronizer::binding_for_scenario(std::string_view scenario_id) const {
  for (const auto& [key, sid] : bindings_) {
    if (sid == scenario_id) return Binding{key.first, key.second, sid};
  }
  return std::nullopt;
}

Diagnostic Synchronizer::fault(const mapping::MappingRule& rule, const SourceLocation& where,
                               std::string_view runtime_id, const std::string& message) const {
  return {Severity::Error, where, scenario_id_for(rule.id, runtime_id),
          "EvalFault in rule '" + rule.id + "' for '" + std::string(runtime_id) + "': " + message};
}

void Synchronizer::drop_binding(std::map<BindingKey, std::string>& bindings, const BindingKey& key,
                                meta::Model& target, SyncResult& out) {
  auto it = bindings.find(key);
  if (it == bindings.end()) return;
  if (target.contains(it->second)) append(out.scenario_events, target.remove(it->second, Origin::Synchronizer));
  bindings.erase(it);
}

void Synchronizer::reconcile(const CompiledRule& cr, std::string_view runtime_id,
                             const std::set<std::string>* changed, meta::Model& target,
                             std::map<BindingKey, std::string>& bindings, SyncResult& out) {
  const mapping::MappingRule& rule = *cr.rule;
  const BindingKey key{rule.id, std::string(runtime_id)};
  const meta::ModelElement* src = runtime_.find(runtime_id);
  if (!src || src->class_name != rule.source_class) {
    drop_binding(bindings, key, target, out);
    return;
  }

  const std::string sid = scenario_id_for(rule.id, runtime_id);
  auto bound = bindings.find(key);
  const meta::ModelElement* existing = target.find(sid);
  if (bound != bindings.end() && (!existing || existing->class_name != rule.target_class)) {
    drop_binding(bindings, key, target, out);
    bound = bindings.end();
    existing = nullptr;
  }
  if (bound == bindings.end() && existing) {
    out.diagnostics.push_back(fault(rule, rule.where, runtime_id,
                                    "scenario element '" + sid + "' exists and is not rule-derived"));
    return;
  }

  meta::ModelElement blank;
  if (!existing) {
    blank.id = sid;
    blank.class_name = rule.target_class;
    for (const auto& a : target.metamodel().at(rule.target_class).attributes) {
      blank.attrs[a.name] = meta::default_value(a.type);
    }
  }
  expr::EvalContext ctx;
  ctx.source = src;
  ctx.self = src;
  ctx.target = existing ? existing : &blank;

  bool matches = true;
  if (cr.predicate) {
    try {
      matches = std::get<bool>(cr.predicate->run(ctx));
    } catch (const expr::EvalError& e) {
      out.diagnostics.push_back(fault(rule, rule.predicate_where, runtime_id, e.what()));
      return;
    }
  }
  if (!matches) {
    drop_binding(bindings, key, target, out);
    return;
  }

  const meta::MetaClass& cls = target.metamodel().at(rule.target_class);
  // A target attribute fed by several mappings is recomputed through all of
  // them, so the later mapping still wins on partial updates.
  std::set<std::string> stale;
  if (existing && changed) {
    for (const auto& m : cr.maps) {
      if (std::any_of(m.source_reads.begin(), m.source_reads.end(),
                      [&](const std::string& a) { return changed->count(a) > 0; })) {
        stale.insert(m.mapping->target);
      }
    }
  }
  std::vector<std::pair<std::string, meta::Value>> values;
  for (const auto& m : cr.maps) {
    if (existing && changed && !stale.count(m.mapping->target)) continue;
    try {
      meta::Value v = m.program.run(ctx);
      auto coerced = meta::coerce(v, cls.attribute(m.mapping->target)->type);
      if (!coerced) {
        throw expr::EvalError(expr::EvalErrc::TypeError,
                              m.mapping->target + " cannot hold " + meta::format_value(v));
      }
      values.emplace_back(m.mapping->target, std::move(*coerced));
    } catch (const expr::EvalError& e) {
      out.diagnostics.push_back(fault(rule, m.mapping->where, runtime_id, e.what()));
      return;
    }
  }

  if (!existing) {
    meta::AttrMap initial;
    for (auto& [name, v] : values) initial[name] = std::move(v);
    out.scenario_events.push_back(target.instantiate(rule.target_class, sid, std::move(initial),
                                                     Origin::Synchronizer));
    bindings[key] = sid;
    return;
  }
  // Bound elements are owned by the synchronizer, so read-only scenario
  // attributes are written through apply().
  for (auto& [name, v] : values) {
    const meta::Value& old = target.at(sid).get(name);
    if (meta::same_value(old, v)) continue;
    ChangeEvent ev;
    ev.model = target.tag();
    ev.element_id = sid;
    ev.kind = ChangeKind::AttrChanged;
    ev.class_name = rule.target_class;
    ev.attr = name;
    ev.old_value = old;
    ev.new_value = v;
    ev.origin = Origin::Synchronizer;
    target.apply(ev);
    out.scenario_events.push_back(std::move(ev));
  }
}

void Synchronizer::reconcile_events(const std::vector<ChangeEvent>& events, SyncResult& out) {
  // Runtime id -> changed attributes; nullopt means re-evaluate everything.
  std::map<std::string, std::optional<std::set<std::string>>> affected;
  for (const auto& ev : events) {
    if (ev.model != meta::ModelTag::Runtime) continue;
    switch (ev.kind) {
      case ChangeKind::Created:
      case ChangeKind::Deleted:
        affected[ev.element_id] = std::nullopt;
        break;
      case ChangeKind::AttrChanged: {
        auto [it, inserted] = affected.try_emplace(ev.element_id, std::set<std::string>{});
        if (it->second) it->second->insert(ev.attr);
        break;
      }
      case ChangeKind::Linked:
      case ChangeKind::Unlinked:
        break;
    }
  }
  for (const auto& cr : compiled_) {
    for (const auto& [id, changed] : affected) {
      reconcile(cr, id, changed ? &*changed : nullptr, scenario_, bindings_, out);
    }
  }
}

SyncResult Synchronizer::sync_runtime_to_scenario(const std::vector<ChangeEvent>& events) {
  SyncResult out;
  out.version_at_start = version();
  reconcile_events(events, out);
  out.version_at_end = version();
  return out;
}

SyncResult Synchronizer::sync_scenario_to_runtime(const std::vector<ChangeEvent>& events) {
  SyncResult out;
  out.version_at_start = version();
  for (const auto& ev : events) {
    if (ev.model != meta::ModelTag::Scenario || ev.kind != ChangeKind::AttrChanged) continue;
    if (ev.origin != Origin::ScenarioEngine && ev.origin != Origin::Console) continue;
    auto binding = binding_for_scenario(ev.element_id);
    if (!binding || !ev.new_value) continue;
    const mapping::MappingRule* rule = rules_.find(binding->rule_id);
    if (!rule || rule->direction != mapping::Direction::Bidirectional) continue;
    for (const auto& wb : rule->writebacks) {
      if (wb.target != ev.attr) continue;
      WriteRecord w{binding->runtime_id, wb.source, *ev.new_value, false, {}};
      try {
        auto acks = writer_.push_write(w.dev_id, w.attr, w.value);
        w.ok = true;
        reconcile_events(acks, out);
        append(out.runtime_events, std::move(acks));
      } catch (const Error& e) {
        w.error = e.what();
        resync_pending_ = true;
        out.diagnostics.push_back({Severity::Error, wb.where, ev.element_id,
                                   "WriteFault on " + w.dev_id + "." + w.attr + ": " + e.what()});
      }
      if (observer_) observer_(ev, w);
      out.writes.push_back(std::move(w));
    }
  }
  out.version_at_end = version();
  return out;
}

SyncResult Synchronizer::full_resync() {
  SyncResult out;
  out.version_at_start = version();
  meta::Model projected = scenario_;
  auto bindings = bindings_;
  SyncResult scratch;
  for (auto it = bindings.begin(); it != bindings.end();) {
    const mapping::MappingRule* rule = rules_.find(it->first.first);
    const meta::ModelElement* el = projected.find(it->second);
    if (!rule || !el || el->class_name != rule->target_class) {
      if (el) projected.remove(it->second, Origin::Synchronizer);
      it = bindings.erase(it);
    } else {
      // Bound elements are projected afresh: attributes no mapping feeds
      // return to their defaults.
      for (const auto& a : projected.metamodel().at(el->class_name).attributes) {
        meta::Value fresh = meta::default_value(a.type);
        const meta::Value& now = el->get(a.name);
        if (meta::same_value(now, fresh)) continue;
        meta::ChangeEvent ev;
        ev.model = projected.tag();
        ev.element_id = it->second;
        ev.kind = meta::ChangeKind::AttrChanged;
        ev.class_name = el->class_name;
        ev.attr = a.name;
        ev.old_value = now;
        ev.new_value = std::move(fresh);
        ev.origin = Origin::Synchronizer;
        projected.apply(ev);
      }
      ++it;
    }
  }
  for (const auto& cr : compiled_) {
    std::set<std::string> ids;
    for (const auto* el : runtime_.elements_of(cr.rule->source_class)) ids.insert(el->id);
    for (const auto& [key, sid] : bindings) {
      if (key.first == cr.rule->id) ids.insert(key.second);
    }
    for (const auto& id : ids) reconcile(cr, id, nullptr, projected, bindings, scratch);
  }
  out.diagnostics = std::move(scratch.diagnostics);
  for (auto& ev : meta::diff(scenario_, projected)) {
    scenario_.apply(ev);
    out.scenario_events.push_back(std::move(ev));
  }
  bindings_ = std::move(bindings);
  resync_pending_ = false;
  out.version_at_end = version();
  return out;
}

void Synchronizer::enqueue(const std::vector<ChangeEvent>& runtime_events) {
  pending_.insert(pending_.end(), runtime_events.begin(), runtime_events.end());
}

SyncResult Synchronizer::process_pending() {
  std::vector<ChangeEvent> batch(std::make_move_iterator(pending_.begin()),
                                 std::make_move_iterator(pending_.end()));
  pending_.clear();
  return sync_runtime_to_scenario(batch);
}

SyncResult Synchronizer::reload_rules(mapping::RuleSet rules) {
  auto diags = mapping::validate(rules, runtime_.metamodel(), scenario_.metamodel());
  if (has_errors(diags)) throw ValidationFailed(std::move(diags));
  const std::uint64_t next = rules_.version + 1;
  rules_ = std::move(rules);
  rules_.version = next;
  compile();
  pending_.clear();
  SyncResult out = full_resync();
  out.diagnostics.insert(out.diagnostics.begin(), diags.begin(), diags.end());
  return out;
}

}  // namespace rtm::sync
