#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtm/meta/metamodel.hpp"
#include "rtm/meta/value.hpp"

namespace rtm::meta {

enum class ModelTag { Runtime, Scenario };
enum class ChangeKind { Created, Deleted, AttrChanged, Linked, Unlinked };
enum class Origin { External, Synchronizer, ScenarioEngine, Console };

std::string_view to_string(ModelTag t);
std::string_view to_string(ChangeKind k);
std::string_view to_string(Origin o);

using AttrMap = std::map<std::string, Value, std::less<>>;

/// One unit of change. Field use depends on `kind`:
///  - Created: `class_name` and the full initial `attrs`
///  - AttrChanged: `attr`, `old_value`, `new_value` (never equal)
///  - Linked / Unlinked: `attr` holds the reference name, `target_id` the other end
struct ChangeEvent {
  ModelTag model = ModelTag::Runtime;
  std::string element_id;
  ChangeKind kind = ChangeKind::AttrChanged;
  std::string class_name;
  AttrMap attrs;
  std::string attr;
  std::optional<Value> old_value;
  std::optional<Value> new_value;
  std::string target_id;
  Origin origin = Origin::External;
};

struct ModelElement {
  std::string id;
  std::string class_name;
  AttrMap attrs;
  std::map<std::string, std::vector<std::string>, std::less<>> refs;

  const Value& get(std::string_view attr) const;
};

bool operator==(const ModelElement& a, const ModelElement& b);

/// A typed instance graph over a shared Metamodel. Every mutation returns the
/// events it caused; a model never publishes events on its own. Copying a
/// Model yields an independent snapshot over the same registry.
class Model {
 public:
  Model(std::shared_ptr<const Metamodel> metamodel, ModelTag tag);

  ModelTag tag() const { return tag_; }
  const Metamodel& metamodel() const { return *metamodel_; }
  const std::shared_ptr<const Metamodel>& metamodel_ptr() const { return metamodel_; }

  /// Unset attributes take type defaults. Read-only attributes may be given
  /// initial values here.
  ChangeEvent instantiate(std::string_view class_name, std::string_view id, AttrMap initial = {},
                          Origin origin = Origin::External);

  /// Returns nullopt when `value` equals the stored value. Int values are
  /// promoted for Float attributes.
  std::optional<ChangeEvent> set_attribute(std::string_view id, std::string_view attr,
                                           const Value& value, Origin origin = Origin::External);

  /// Removes the element and every link pointing at it. The returned list
  /// holds the Unlinked events first and the Deleted event last.
  std::vector<ChangeEvent> remove(std::string_view id, Origin origin = Origin::External);

  std::optional<ChangeEvent> link(std::string_view from, std::string_view ref, std::string_view to,
                                  Origin origin = Origin::External);
  std::optional<ChangeEvent> unlink(std::string_view from, std::string_view ref,
                                    std::string_view to, Origin origin = Origin::External);

  /// Replays an event produced by any model over the same registry. Writability
  /// is not rechecked; types are.
  void apply(const ChangeEvent& event);

  const ModelElement* find(std::string_view id) const;
  const ModelElement& at(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  std::size_t size() const { return elements_.size(); }

  /// Elements keyed by id, ascending.
  const std::map<std::string, ModelElement, std::less<>>& elements() const { return elements_; }
  std::vector<const ModelElement*> elements_of(std::string_view class_name) const;

  const std::optional<std::string>& root() const { return root_; }
  void set_root(std::string_view id);

  /// Lower multiplicity bounds are not enforced per mutation; this lists
  /// elements whose `1` references are currently empty.
  std::vector<std::string> unsatisfied_references() const;

  friend bool operator==(const Model& a, const Model& b) {
    return a.root_ == b.root_ && a.elements_ == b.elements_;
  }

 private:
  ModelElement& mutable_at(std::string_view id);
  ChangeEvent base_event(std::string_view id, ChangeKind kind, Origin origin) const;

  std::shared_ptr<const Metamodel> metamodel_;
  ModelTag tag_;
  std::map<std::string, ModelElement, std::less<>> elements_;
  std::optional<std::string> root_;
};

/// Events that turn `a` into `b`, ordered by element id then attribute name.
/// Creations and attribute changes come first, then link changes, then
/// deletions, so the list can be replayed front to back.
std::vector<ChangeEvent> diff(const Model& a, const Model& b);

/// True when both models were built over the same registry instance.
bool same_registry(const Model& a, const Model& b);

}  // namespace rtm::meta
