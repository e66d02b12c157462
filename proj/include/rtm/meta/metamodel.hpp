#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rtm/error.hpp"
#include "rtm/meta/value.hpp"

namespace rtm::meta {

enum class ModelErrc {
  DuplicateClass,
  UnknownTargetClass,
  DuplicateMember,
  InvalidName,
  UnknownClass,
  DuplicateId,
  TypeMismatch,
  UnknownElement,
  UnknownAttribute,
  UnknownReference,
  ReadOnlyAttribute,
  MultiplicityViolation,
  MetamodelMismatch,
};

std::string_view to_string(ModelErrc code);

class ModelError : public Error {
 public:
  ModelError(ModelErrc code, const std::string& what)
      : Error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ModelErrc code() const noexcept { return code_; }

 private:
  ModelErrc code_;
};

enum class Multiplicity { ZeroOrOne, One, Many };

std::string_view to_string(Multiplicity m);

struct AttributeDef {
  std::string name;
  AttrType type;
  bool writable = true;

  friend bool operator==(const AttributeDef&, const AttributeDef&) = default;
};

struct ReferenceDef {
  std::string name;
  std::string target;
  Multiplicity multiplicity = Multiplicity::Many;

  friend bool operator==(const ReferenceDef&, const ReferenceDef&) = default;
};

struct MetaClass {
  std::string name;
  std::vector<AttributeDef> attributes;
  std::vector<ReferenceDef> references;

  const AttributeDef* attribute(std::string_view attr) const;
  const ReferenceDef* reference(std::string_view ref) const;

  friend bool operator==(const MetaClass&, const MetaClass&) = default;
};

/// Registry of classes shared by the models built on it. Classes are never
/// removed; references returned by `define_class` stay valid.
class Metamodel {
 public:
  Metamodel() = default;
  explicit Metamodel(std::string name) : name_(std::move(name)) {}

  const MetaClass& define_class(MetaClass spec);

  /// Registers a batch atomically; references may point anywhere inside the
  /// batch or to classes already registered.
  void define_classes(std::vector<MetaClass> specs);

  const MetaClass* find(std::string_view name) const;
  const MetaClass& at(std::string_view name) const;

  /// Classes in definition order.
  std::vector<const MetaClass*> classes() const;

  const std::string& name() const { return name_; }

  friend bool operator==(const Metamodel& a, const Metamodel& b) {
    return a.order_ == b.order_ && a.classes_ == b.classes_;
  }

 private:
  void check_members(const MetaClass& spec) const;

  std::string name_;
  std::map<std::string, MetaClass, std::less<>> classes_;
  std::vector<std::string> order_;
};

}  // namespace rtm::meta
