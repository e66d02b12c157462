#include "rtm/runtime/connector.hpp"

#include <algorithm>

#include "rtm/meta/json.hpp"

namespace rtm::runtime {

using meta::ChangeEvent;
using meta::Origin;

namespace {

void append(std::vector<ChangeEvent>& out, std::optional<ChangeEvent> ev) {
  if (ev) out.push_back(std::move(*ev));
}

std::string state_path(std::string_view dev_id) {
  return "/devices/" + std::string(dev_id) + "/state";
}

}  // namespace

DeviceConnector::DeviceConnector(meta::Model& model) : model_(model) {
  if (model_.metamodel_ptr() != runtime_metamodel() && !(model_.metamodel() == *runtime_metamodel())) {
    throw meta::ModelError(meta::ModelErrc::MetamodelMismatch, "connector needs the runtime metamodel");
  }
  if (!model_.contains(kRootId)) {
    model_.instantiate("SmartHomeOS", kRootId, {{"name", std::string("SmartHomeOS")}});
  }
  if (!model_.root()) model_.set_root(kRootId);
}

DeviceConnector::Slot& DeviceConnector::slot(std::string_view dev_id) {
  auto it = std::find_if(slots_.begin(), slots_.end(),
                         [&](const Slot& s) { return s.descriptor.dev_id == dev_id; });
  if (it == slots_.end()) throw RuntimeError(RuntimeErrc::UnknownDevice, std::string(dev_id));
  return *it;
}

const DeviceDescriptor* DeviceConnector::descriptor(std::string_view dev_id) const {
  for (const auto& s : slots_) {
    if (s.descriptor.dev_id == dev_id) return &s.descriptor;
  }
  return nullptr;
}

int DeviceConnector::consecutive_failures(std::string_view dev_id) const {
  return const_cast<DeviceConnector*>(this)->slot(dev_id).failures;
}

std::vector<std::string> DeviceConnector::device_ids() const {
  std::vector<std::string> out;
  for (const auto& s : slots_) out.push_back(s.descriptor.dev_id);
  return out;
}

std::vector<ChangeEvent> DeviceConnector::register_device(DeviceDescriptor descriptor,
                                                          std::shared_ptr<DeviceTransport> transport) {
  if (this->descriptor(descriptor.dev_id) || model_.contains(descriptor.dev_id)) {
    throw RuntimeError(RuntimeErrc::DuplicateDevice, descriptor.dev_id);
  }
  if (auto problems = descriptor_problems(descriptor); !problems.empty()) {
    throw RuntimeError(RuntimeErrc::DescriptorInvalid, descriptor.dev_id + ": " + problems.front());
  }
  if (!transport) throw RuntimeError(RuntimeErrc::DescriptorInvalid, descriptor.dev_id + ": no transport");
  std::vector<ChangeEvent> out;
  const auto type = descriptor.device_type;
  out.push_back(model_.instantiate(runtime_class(type), descriptor.dev_id,
                                   {{"dev_id", descriptor.dev_id},
                                    {"device_type", std::string(sim::to_string(type))},
                                    {"online", false}}));
  append(out, model_.link(kRootId, root_reference(type), descriptor.dev_id));
  slots_.push_back({std::move(descriptor), std::move(transport)});
  return out;
}

std::vector<ChangeEvent> DeviceConnector::apply_state(const Slot& s, const nlohmann::json& attrs,
                                                      Origin origin) {
  std::vector<ChangeEvent> out;
  if (!attrs.is_object()) return out;
  for (const auto& a : s.descriptor.readable) {
    auto it = attrs.find(a.name);
    if (it == attrs.end()) continue;
    auto v = meta::value_from_json(*it, a.type);
    if (!v) continue;
    // Device truth, so read-only attributes are written through apply().
    const meta::ModelElement& el = model_.at(s.descriptor.dev_id);
    const meta::Value& old = el.get(a.name);
    if (meta::same_value(old, *v)) continue;
    ChangeEvent ev;
    ev.model = model_.tag();
    ev.element_id = el.id;
    ev.kind = meta::ChangeKind::AttrChanged;
    ev.class_name = el.class_name;
    ev.attr = a.name;
    ev.old_value = old;
    ev.new_value = *v;
    ev.origin = origin;
    model_.apply(ev);
    out.push_back(std::move(ev));
  }
  return out;
}

std::vector<ChangeEvent> DeviceConnector::poll_once(std::string_view dev_id) {
  Slot& s = slot(dev_id);
  s.countdown = s.descriptor.poll_interval;
  auto resp = s.transport->exchange({"GET", state_path(dev_id), ""});
  nlohmann::json body;
  if (resp.status == 200) body = nlohmann::json::parse(resp.body, nullptr, false);
  std::vector<ChangeEvent> out;
  if (resp.status != 200 || body.is_discarded() || !body.is_object()) {
    ++s.failures;
    if (s.failures >= s.descriptor.offline_after) {
      append(out, model_.set_attribute(dev_id, "online", false, Origin::External));
    }
    return out;
  }
  s.failures = 0;
  out = apply_state(s, body.value("attrs", nlohmann::json::object()), Origin::External);
  append(out, model_.set_attribute(dev_id, "online", true, Origin::External));
  return out;
}

std::vector<ChangeEvent> DeviceConnector::poll_due() {
  std::vector<ChangeEvent> out;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].countdown > 0 && --slots_[i].countdown > 0) continue;
    auto events = poll_once(slots_[i].descriptor.dev_id);
    out.insert(out.end(), std::make_move_iterator(events.begin()),
               std::make_move_iterator(events.end()));
  }
  return out;
}

std::vector<ChangeEvent> DeviceConnector::push_write(std::string_view dev_id, std::string_view attr,
                                                     const meta::Value& value) {
  Slot& s = slot(dev_id);
  const DescriptorAttr* w = s.descriptor.find_writable(attr);
  if (!w) throw RuntimeError(RuntimeErrc::ReadOnlyAttribute, std::string(dev_id) + "." + std::string(attr));
  auto v = meta::coerce(value, w->type);
  if (!v) {
    throw RuntimeError(RuntimeErrc::TypeMismatch, std::string(dev_id) + "." + std::string(attr) +
                                                      " expects " + meta::type_name(w->type));
  }
  nlohmann::json body;
  body["attrs"][std::string(attr)] = meta::to_json(*v);
  ++writes_;
  auto resp = s.transport->exchange({"PUT", state_path(dev_id), body.dump()});
  if (resp.status == 0 || resp.status == 503) {
    throw RuntimeError(RuntimeErrc::DeviceOffline, std::string(dev_id));
  }
  if (resp.status == 422) {
    throw RuntimeError(RuntimeErrc::ReadOnlyAttribute, std::string(dev_id) + "." + std::string(attr));
  }
  auto ack = nlohmann::json::parse(resp.body, nullptr, false);
  if (resp.status != 200 || ack.is_discarded() || !ack.is_object()) {
    throw RuntimeError(RuntimeErrc::WriteFailed,
                       std::string(dev_id) + ": status " + std::to_string(resp.status));
  }
  s.failures = 0;
  return apply_state(s, ack.value("attrs", nlohmann::json::object()), Origin::Synchronizer);
}

}  // namespace rtm::runtime
