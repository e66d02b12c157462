#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "rtm/meta/model.hpp"
#include "rtm/runtime/layout.hpp"
#include "rtm/sim/service.hpp"

namespace rtm::runtime {

/// Carries wire requests to a device endpoint. A response with status 0
/// means the endpoint could not be reached.
class DeviceTransport {
 public:
  virtual ~DeviceTransport() = default;
  virtual sim::WireResponse exchange(const sim::WireRequest& req) = 0;
};

/// Calls a SimService in the same process. Requests still go through the
/// wire encoding, so embedded and external runs see identical bytes.
class InProcessTransport : public DeviceTransport {
 public:
  explicit InProcessTransport(std::shared_ptr<sim::SimService> service)
      : service_(std::move(service)) {}
  sim::WireResponse exchange(const sim::WireRequest& req) override { return service_->handle(req); }

 private:
  std::shared_ptr<sim::SimService> service_;
};

/// Issues the sync-relevant write on behalf of the synchronizer. Returns the
/// runtime events caused by the acknowledgement.
class DeviceWriter {
 public:
  virtual ~DeviceWriter() = default;
  virtual std::vector<meta::ChangeEvent> push_write(std::string_view dev_id, std::string_view attr,
                                                    const meta::Value& value) = 0;
};

/// Builds and maintains the runtime model from device descriptors. The model
/// must be built over runtime_metamodel(); the connector creates the root
/// when it is missing. Not thread-safe: callers own the model.
class DeviceConnector : public DeviceWriter {
 public:
  explicit DeviceConnector(meta::Model& model);

  /// Creates the element (online = false) and links it under the root. The
  /// first poll happens on the next poll_due().
  std::vector<meta::ChangeEvent> register_device(DeviceDescriptor descriptor,
                                                 std::shared_ptr<DeviceTransport> transport);

  /// One GET of the device state. Differences become events with origin
  /// External; failures only move the failure counter and, at the
  /// offline_after-th consecutive one, the online flag.
  std::vector<meta::ChangeEvent> poll_once(std::string_view dev_id);

  /// Polls every device whose interval has elapsed, in registration order.
  std::vector<meta::ChangeEvent> poll_due();

  /// PUTs one writable attribute and applies the acknowledged state with
  /// origin Synchronizer. Throws RuntimeError: UnknownDevice,
  /// ReadOnlyAttribute, TypeMismatch, DeviceOffline (model untouched) or
  /// WriteFailed.
  std::vector<meta::ChangeEvent> push_write(std::string_view dev_id, std::string_view attr,
                                            const meta::Value& value) override;

  const DeviceDescriptor* descriptor(std::string_view dev_id) const;
  int consecutive_failures(std::string_view dev_id) const;
  std::vector<std::string> device_ids() const;
  std::size_t writes_issued() const { return writes_; }

 private:
  struct Slot {
    DeviceDescriptor descriptor;
    std::shared_ptr<DeviceTransport> transport;
    int failures = 0;
    int countdown = 0;  // ticks until the next poll
  };

  Slot& slot(std::string_view dev_id);
  std::vector<meta::ChangeEvent> apply_state(const Slot& s, const nlohmann::json& attrs,
                                             meta::Origin origin);

  meta::Model& model_;
  std::vector<Slot> slots_;
  std::size_t writes_ = 0;
};

}  // namespace rtm::runtime
