#include "rtm/meta/model.hpp"

#include <algorithm>
#include <set>

namespace rtm::meta {

std::string_view to_string(ModelTag t) {
  return t == ModelTag::Runtime ? "runtime" : "scenario";
}

std::string_view to_string(ChangeKind k) {
  switch (k) {
    case ChangeKind::Created: return "created";
    case ChangeKind::Deleted: return "deleted";
    case ChangeKind::AttrChanged: return "attrChanged";
    case ChangeKind::Linked: return "linked";
    case ChangeKind::Unlinked: return "unlinked";
  }
  return "?";
}

std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::External: return "external";
    case Origin::Synchronizer: return "synchronizer";
    case Origin::ScenarioEngine: return "scenarioEngine";
    case Origin::Console: return "console";
  }
  return "?";
}

const Value& ModelElement::get(std::string_view attr) const {
  auto it = attrs.find(attr);
  if (it == attrs.end()) {
    throw ModelError(ModelErrc::UnknownAttribute, id + "." + std::string(attr));
  }
  return it->second;
}

bool operator==(const ModelElement& a, const ModelElement& b) {
  if (a.id != b.id || a.class_name != b.class_name || a.refs != b.refs) return false;
  return std::equal(a.attrs.begin(), a.attrs.end(), b.attrs.begin(), b.attrs.end(),
                    [](const auto& x, const auto& y) {
                      return x.first == y.first && same_value(x.second, y.second);
                    });
}

Model::Model(std::shared_ptr<const Metamodel> metamodel, ModelTag tag)
    : metamodel_(std::move(metamodel)), tag_(tag) {}

ModelElement& Model::mutable_at(std::string_view id) {
  auto it = elements_.find(id);
  if (it == elements_.end()) throw ModelError(ModelErrc::UnknownElement, std::string(id));
  return it->second;
}

const ModelElement* Model::find(std::string_view id) const {
  auto it = elements_.find(id);
  return it == elements_.end() ? nullptr : &it->second;
}

const ModelElement& Model::at(std::string_view id) const {
  if (const auto* e = find(id)) return *e;
  throw ModelError(ModelErrc::UnknownElement, std::string(id));
}

std::vector<const ModelElement*> Model::elements_of(std::string_view class_name) const {
  std::vector<const ModelElement*> out;
  for (const auto& [id, e] : elements_) {
    if (e.class_name == class_name) out.push_back(&e);
  }
  return out;
}

void Model::set_root(std::string_view id) {
  at(id);
  root_ = std::string(id);
}

ChangeEvent Model::base_event(std::string_view id, ChangeKind kind, Origin origin) const {
  ChangeEvent ev;
  ev.model = tag_;
  ev.element_id = std::string(id);
  ev.kind = kind;
  ev.origin = origin;
  return ev;
}

ChangeEvent Model::instantiate(std::string_view class_name, std::string_view id, AttrMap initial,
                               Origin origin) {
  const MetaClass* cls = metamodel_->find(class_name);
  if (!cls) throw ModelError(ModelErrc::UnknownClass, std::string(class_name));
  if (id.empty()) throw ModelError(ModelErrc::InvalidName, "empty element id");
  if (elements_.count(id)) throw ModelError(ModelErrc::DuplicateId, std::string(id));

  ModelElement element;
  element.id = std::string(id);
  element.class_name = cls->name;
  for (auto& [name, value] : initial) {
    const AttributeDef* def = cls->attribute(name);
    if (!def) throw ModelError(ModelErrc::UnknownAttribute, cls->name + "." + name);
    auto coerced = coerce(value, def->type);
    if (!coerced) {
      throw ModelError(ModelErrc::TypeMismatch, cls->name + "." + name + " expects " +
                                                    type_name(def->type) + ", got " +
                                                    format_value(value));
    }
    element.attrs.emplace(name, std::move(*coerced));
  }
  for (const auto& def : cls->attributes) {
    if (!element.attrs.count(def.name)) element.attrs.emplace(def.name, default_value(def.type));
  }
  for (const auto& ref : cls->references) element.refs[ref.name];

  ChangeEvent ev = base_event(id, ChangeKind::Created, origin);
  ev.class_name = cls->name;
  ev.attrs = element.attrs;
  elements_.emplace(element.id, std::move(element));
  return ev;
}

std::optional<ChangeEvent> Model::set_attribute(std::string_view id, std::string_view attr,
                                                const Value& value, Origin origin) {
  ModelElement& element = mutable_at(id);
  const MetaClass& cls = metamodel_->at(element.class_name);
  const AttributeDef* def = cls.attribute(attr);
  if (!def) throw ModelError(ModelErrc::UnknownAttribute, cls.name + "." + std::string(attr));
  auto coerced = coerce(value, def->type);
  if (!coerced) {
    throw ModelError(ModelErrc::TypeMismatch, cls.name + "." + std::string(attr) + " expects " +
                                                  type_name(def->type) + ", got " +
                                                  format_value(value));
  }
  if (!def->writable && origin != Origin::External) {
    throw ModelError(ModelErrc::ReadOnlyAttribute, cls.name + "." + std::string(attr));
  }
  Value& slot = element.attrs.find(attr)->second;
  if (same_value(slot, *coerced)) return std::nullopt;

  ChangeEvent ev = base_event(id, ChangeKind::AttrChanged, origin);
  ev.attr = std::string(attr);
  ev.old_value = slot;
  ev.new_value = *coerced;
  slot = std::move(*coerced);
  return ev;
}

std::vector<ChangeEvent> Model::remove(std::string_view id, Origin origin) {
  mutable_at(id);
  std::vector<ChangeEvent> events;
  for (auto& [other_id, other] : elements_) {
    for (auto& [ref, targets] : other.refs) {
      auto it = std::find(targets.begin(), targets.end(), id);
      if (it == targets.end()) continue;
      targets.erase(it);
      ChangeEvent ev = base_event(other_id, ChangeKind::Unlinked, origin);
      ev.attr = ref;
      ev.target_id = std::string(id);
      events.push_back(std::move(ev));
    }
  }
  elements_.erase(elements_.find(id));
  if (root_ && *root_ == id) root_.reset();
  events.push_back(base_event(id, ChangeKind::Deleted, origin));
  return events;
}

std::optional<ChangeEvent> Model::link(std::string_view from, std::string_view ref,
                                       std::string_view to, Origin origin) {
  ModelElement& source = mutable_at(from);
  const MetaClass& cls = metamodel_->at(source.class_name);
  const ReferenceDef* def = cls.reference(ref);
  if (!def) throw ModelError(ModelErrc::UnknownReference, cls.name + "." + std::string(ref));
  const ModelElement& target = at(to);
  if (target.class_name != def->target) {
    throw ModelError(ModelErrc::TypeMismatch, cls.name + "." + std::string(ref) + " expects " +
                                                  def->target + ", got " + target.class_name);
  }
  auto& targets = source.refs[def->name];
  if (std::find(targets.begin(), targets.end(), to) != targets.end()) return std::nullopt;
  if (def->multiplicity != Multiplicity::Many && !targets.empty()) {
    throw ModelError(ModelErrc::MultiplicityViolation,
                     cls.name + "." + std::string(ref) + " holds at most one element");
  }
  targets.emplace_back(to);
  ChangeEvent ev = base_event(from, ChangeKind::Linked, origin);
  ev.attr = def->name;
  ev.target_id = std::string(to);
  return ev;
}

std::optional<ChangeEvent> Model::unlink(std::string_view from, std::string_view ref,
                                         std::string_view to, Origin origin) {
  ModelElement& source = mutable_at(from);
  auto refs = source.refs.find(ref);
  if (refs == source.refs.end()) {
    throw ModelError(ModelErrc::UnknownReference, source.class_name + "." + std::string(ref));
  }
  auto& targets = refs->second;
  auto it = std::find(targets.begin(), targets.end(), to);
  if (it == targets.end()) return std::nullopt;
  targets.erase(it);
  ChangeEvent ev = base_event(from, ChangeKind::Unlinked, origin);
  ev.attr = refs->first;
  ev.target_id = std::string(to);
  return ev;
}

void Model::apply(const ChangeEvent& event) {
  switch (event.kind) {
    case ChangeKind::Created:
      instantiate(event.class_name, event.element_id, event.attrs, event.origin);
      return;
    case ChangeKind::Deleted:
      remove(event.element_id, event.origin);
      return;
    case ChangeKind::AttrChanged:
      if (!event.new_value) {
        throw ModelError(ModelErrc::TypeMismatch, "attrChanged event without a new value");
      }
      set_attribute(event.element_id, event.attr, *event.new_value, Origin::External);
      return;
    case ChangeKind::Linked:
      link(event.element_id, event.attr, event.target_id, event.origin);
      return;
    case ChangeKind::Unlinked:
      unlink(event.element_id, event.attr, event.target_id, event.origin);
      return;
  }
}

std::vector<std::string> Model::unsatisfied_references() const {
  std::vector<std::string> out;
  for (const auto& [id, e] : elements_) {
    const MetaClass& cls = metamodel_->at(e.class_name);
    for (const auto& ref : cls.references) {
      if (ref.multiplicity != Multiplicity::One) continue;
      auto it = e.refs.find(ref.name);
      if (it == e.refs.end() || it->second.empty()) out.push_back(id + "." + ref.name);
    }
  }
  return out;
}

bool same_registry(const Model& a, const Model& b) {
  return a.metamodel_ptr() == b.metamodel_ptr();
}

std::vector<ChangeEvent> diff(const Model& a, const Model& b) {
  if (!same_registry(a, b)) {
    throw ModelError(ModelErrc::MetamodelMismatch, "diff across different metamodels");
  }
  Model work = a;
  std::vector<ChangeEvent> out;
  auto record = [&](ChangeEvent ev) {
    ev.model = a.tag();
    work.apply(ev);
    out.push_back(std::move(ev));
  };
  auto make = [&](std::string_view id, ChangeKind kind) {
    ChangeEvent ev;
    ev.model = a.tag();
    ev.element_id = std::string(id);
    ev.kind = kind;
    ev.origin = Origin::Synchronizer;
    return ev;
  };

  // Pass 1: creations and attribute changes.
  std::set<std::string, std::less<>> ids;
  for (const auto& [id, _] : a.elements()) ids.insert(id);
  for (const auto& [id, _] : b.elements()) ids.insert(id);
  for (const auto& id : ids) {
    const ModelElement* target = b.find(id);
    if (!target) continue;
    const ModelElement* current = work.find(id);
    if (current && current->class_name != target->class_name) {
      for (auto& ev : work.remove(id, Origin::Synchronizer)) out.push_back(std::move(ev));
      current = nullptr;
    }
    if (!current) {
      ChangeEvent ev = make(id, ChangeKind::Created);
      ev.class_name = target->class_name;
      ev.attrs = target->attrs;
      record(std::move(ev));
      continue;
    }
    for (const auto& [name, value] : target->attrs) {
      const Value& old = current->attrs.find(name)->second;
      if (same_value(old, value)) continue;
      ChangeEvent ev = make(id, ChangeKind::AttrChanged);
      ev.attr = name;
      ev.old_value = old;
      ev.new_value = value;
      record(std::move(ev));
      current = work.find(id);
    }
  }

  // Pass 2: reference lists, keeping the longest shared prefix in place.
  for (const auto& [id, target] : b.elements()) {
    for (const auto& [ref, wanted] : target.refs) {
      std::vector<std::string> have = work.at(id).refs.find(ref)->second;
      std::vector<std::string> kept;
      for (const auto& t : have) {
        if (std::find(wanted.begin(), wanted.end(), t) != wanted.end()) kept.push_back(t);
      }
      std::size_t prefix = 0;
      while (prefix < kept.size() && prefix < wanted.size() && kept[prefix] == wanted[prefix]) {
        ++prefix;
      }
      std::set<std::string> keep(kept.begin(), kept.begin() + static_cast<long>(prefix));
      for (const auto& t : have) {
        if (keep.count(t)) continue;
        ChangeEvent ev = make(id, ChangeKind::Unlinked);
        ev.attr = ref;
        ev.target_id = t;
        record(std::move(ev));
      }
      for (std::size_t i = prefix; i < wanted.size(); ++i) {
        ChangeEvent ev = make(id, ChangeKind::Linked);
        ev.attr = ref;
        ev.target_id = wanted[i];
        record(std::move(ev));
      }
    }
  }

  // Pass 3: deletions.
  for (const auto& id : ids) {
    if (b.contains(id) || !work.contains(id)) continue;
    for (auto& ev : work.remove(id, Origin::Synchronizer)) {
      ev.model = a.tag();
      out.push_back(std::move(ev));
    }
  }
  return out;
}

}  // namespace rtm::meta
