#include "rtm/meta/metamodel.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace rtm::meta {

std::string_view to_string(ModelErrc code) {
  switch (code) {
    case ModelErrc::DuplicateClass: return "DuplicateClass";
    case ModelErrc::UnknownTargetClass: return "UnknownTargetClass";
    case ModelErrc::DuplicateMember: return "DuplicateMember";
    case ModelErrc::InvalidName: return "InvalidName";
    case ModelErrc::UnknownClass: return "UnknownClass";
    case ModelErrc::DuplicateId: return "DuplicateId";
    case ModelErrc::TypeMismatch: return "TypeMismatch";
    case ModelErrc::UnknownElement: return "UnknownElement";
    case ModelErrc::UnknownAttribute: return "UnknownAttribute";
    case ModelErrc::UnknownReference: return "UnknownReference";
    case ModelErrc::ReadOnlyAttribute: return "ReadOnlyAttribute";
    case ModelErrc::MultiplicityViolation: return "MultiplicityViolation";
    case ModelErrc::MetamodelMismatch: return "MetamodelMismatch";
  }
  return "ModelError";
}

std::string_view to_string(Multiplicity m) {
  switch (m) {
    case Multiplicity::ZeroOrOne: return "0..1";
    case Multiplicity::One: return "1";
    case Multiplicity::Many: return "0..*";
  }
  return "?";
}

const AttributeDef* MetaClass::attribute(std::string_view attr) const {
  auto it = std::find_if(attributes.begin(), attributes.end(),
                         [&](const AttributeDef& a) { return a.name == attr; });
  return it == attributes.end() ? nullptr : &*it;
}

const ReferenceDef* MetaClass::reference(std::string_view ref) const {
  auto it = std::find_if(references.begin(), references.end(),
                         [&](const ReferenceDef& r) { return r.name == ref; });
  return it == references.end() ? nullptr : &*it;
}

namespace {

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_';
  });
}

}  // namespace

void Metamodel::check_members(const MetaClass& spec) const {
  if (!valid_identifier(spec.name)) {
    throw ModelError(ModelErrc::InvalidName, "class name '" + spec.name + "'");
  }
  std::set<std::string, std::less<>> seen;
  auto claim = [&](const std::string& member) {
    if (!valid_identifier(member)) {
      throw ModelError(ModelErrc::InvalidName, spec.name + "." + member);
    }
    if (!seen.insert(member).second) {
      throw ModelError(ModelErrc::DuplicateMember, spec.name + "." + member);
    }
  };
  for (const auto& a : spec.attributes) {
    claim(a.name);
    if (a.type.kind == ValueKind::Enum && a.type.enum_values.empty()) {
      throw ModelError(ModelErrc::TypeMismatch, spec.name + "." + a.name + ": empty Enum");
    }
  }
  for (const auto& r : spec.references) claim(r.name);
}

const MetaClass& Metamodel::define_class(MetaClass spec) {
  std::string name = spec.name;
  std::vector<MetaClass> batch;
  batch.push_back(std::move(spec));
  define_classes(std::move(batch));
  return classes_.find(name)->second;
}

void Metamodel::define_classes(std::vector<MetaClass> specs) {
  std::set<std::string, std::less<>> batch_names;
  for (const auto& spec : specs) {
    check_members(spec);
    if (classes_.count(spec.name) || !batch_names.insert(spec.name).second) {
      throw ModelError(ModelErrc::DuplicateClass, spec.name);
    }
  }
  for (const auto& spec : specs) {
    for (const auto& r : spec.references) {
      if (!classes_.count(r.target) && !batch_names.count(r.target)) {
        throw ModelError(ModelErrc::UnknownTargetClass,
                         spec.name + "." + r.name + " -> " + r.target);
      }
    }
  }
  for (auto& spec : specs) {
    order_.push_back(spec.name);
    std::string key = spec.name;
    classes_.emplace(std::move(key), std::move(spec));
  }
}

const MetaClass* Metamodel::find(std::string_view name) const {
  auto it = classes_.find(name);
  return it == classes_.end() ? nullptr : &it->second;
}

const MetaClass& Metamodel::at(std::string_view name) const {
  if (const auto* c = find(name)) return *c;
  throw ModelError(ModelErrc::UnknownClass, std::string(name));
}

std::vector<const MetaClass*> Metamodel::classes() const {
  std::vector<const MetaClass*> out;
  out.reserve(order_.size());
  for (const auto& n : order_) out.push_back(&classes_.find(n)->second);
  return out;
}

}  // namespace rtm::meta
