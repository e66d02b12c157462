#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rtm/diagnostic.hpp"
#include "rtm/error.hpp"
#include "rtm/expr/eval.hpp"
#include "rtm/mapping/rules.hpp"
#include "rtm/meta/model.hpp"
#include "rtm/runtime/connector.hpp"

namespace rtm::sync {

/// One materialized rule application. The scenario id is always
/// `rule_id@runtime_id`.
struct Binding {
  std::string rule_id;
  std::string runtime_id;
  std::string scenario_id;

  friend bool operator==(const Binding&, const Binding&) = default;
};

std::string scenario_id_for(std::string_view rule_id, std::string_view runtime_id);

/// A device write issued for a scenario change.
struct WriteRecord {
  std::string dev_id;
  std::string attr;
  meta::Value value;
  bool ok = false;
  std::string error;
};

struct SyncResult {
  std::vector<meta::ChangeEvent> scenario_events;
  std::vector<meta::ChangeEvent> runtime_events;  // write acknowledgements
  std::vector<WriteRecord> writes;
  std::vector<Diagnostic> diagnostics;
  std::uint64_t version_at_start = 0;
  std::uint64_t version_at_end = 0;

  void merge(SyncResult other);
};

class ValidationFailed : public Error {
 public:
  explicit ValidationFailed(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

/// The mapping handler. Owns the bindings and is the only writer of bound
/// scenario elements and the only caller of the device writer. Rule-free
/// scenario elements are never touched.
///
/// Semantics of one rule application to runtime element e:
///  - e matches when its class is the rule's source class and the predicate
///    (with source = self = e) is true
///  - a match without binding creates `rule@e` with every attribute mapping
///    evaluated; with a binding, mappings reading a changed attribute of e
///    are re-evaluated
///  - a bound element that stops matching or disappears is deleted
///  - `target` in a mapping reads the bound scenario element as it was before
///    the application (type defaults when it is being created)
///  - a fault in the predicate or any mapping skips the rule for e and leaves
///    the scenario side as it was
/// Not thread-safe: one owner drives every call.
class Synchronizer {
 public:
  using WriteObserver = std::function<void(const meta::ChangeEvent& cause, const WriteRecord& w)>;

  Synchronizer(meta::Model& runtime, meta::Model& scenario, runtime::DeviceWriter& writer);

  /// Validates against both metamodels and swaps atomically: the version is
  /// incremented, the pending queue dropped and bindings recomputed by
  /// full_resync(). Throws ValidationFailed and keeps the active set when any
  /// Error diagnostic is found.
  SyncResult reload_rules(mapping::RuleSet rules);

  SyncResult sync_runtime_to_scenario(const std::vector<meta::ChangeEvent>& events);

  /// Writes scenario changes made by the engine or the console through the
  /// writeback pairs of bidirectional rules. Synchronizer-originated events
  /// are ignored. Write acknowledgements are synced back immediately.
  SyncResult sync_scenario_to_runtime(const std::vector<meta::ChangeEvent>& events);

  /// Makes the bound portion of the scenario equal to the projection of the
  /// current runtime model, through metamodel diff.
  SyncResult full_resync();

  /// Queue used by the host between phases; dropped by reload_rules.
  void enqueue(const std::vector<meta::ChangeEvent>& runtime_events);
  SyncResult process_pending();
  std::size_t pending() const { return pending_.size(); }

  /// Set after a failed device write; the host answers with full_resync().
  bool resync_pending() const { return resync_pending_; }

  const mapping::RuleSet& rules() const { return rules_; }
  std::uint64_t version() const { return rules_.version; }
  std::vector<Binding> bindings() const;
  std::optional<Binding> binding_for_scenario(std::string_view scenario_id) const;

  void set_write_observer(WriteObserver fn) { observer_ = std::move(fn); }

 private:
  struct CompiledMap {
    const mapping::AttrMapping* mapping;
    expr::Program program;
    std::set<std::string> source_reads;  // attrs of source/self
  };
  struct CompiledRule {
    const mapping::MappingRule* rule;
    std::optional<expr::Program> predicate;
    std::vector<CompiledMap> maps;
  };
  using BindingKey = std::pair<std::string, std::string>;  // rule, runtime id

  void compile();
  /// Applies one rule to one runtime element of `runtime_` against `target`.
  /// `changed` empty means every mapping is evaluated.
  void reconcile(const CompiledRule& cr, std::string_view runtime_id,
                 const std::set<std::string>* changed, meta::Model& target,
                 std::map<BindingKey, std::string>& bindings, SyncResult& out);
  void reconcile_events(const std::vector<meta::ChangeEvent>& events, SyncResult& out);
  void drop_binding(std::map<BindingKey, std::string>& bindings, const BindingKey& key,
                    meta::Model& target, SyncResult& out);
  Diagnostic fault(const mapping::MappingRule& rule, const SourceLocation& where,
                   std::string_view runtime_id, const std::string& message) const;

  meta::Model& runtime_;
  meta::Model& scenario_;
  runtime::DeviceWriter& writer_;
  mapping::RuleSet rules_;
  std::vector<CompiledRule> compiled_;
  std::map<BindingKey, std::string> bindings_;
  std::deque<meta::ChangeEvent> pending_;
  bool resync_pending_ = false;
  WriteObserver observer_;
};

}  // namespace rtm::sync
