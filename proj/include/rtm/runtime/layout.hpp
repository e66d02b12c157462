#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rtm/diagnostic.hpp"
#include "rtm/error.hpp"
#include "rtm/meta/metamodel.hpp"
#include "rtm/sim/fleet.hpp"

namespace rtm::runtime {

// Fixed runtime-side metamodel. The kernel has no inheritance, so smart plugs
// are elements of class Socket and every other device is a Device; the
// device_type attribute carries the wire type in both. The SmartHomeOS root
// owns Device elements through `devices` and Socket elements through
// `sockets`.

inline constexpr std::string_view kRootId = "home";

/// Text of the runtime metamodel in the metamodel definition format.
std::string_view runtime_metamodel_text();

/// Shared, immutable instance of the runtime metamodel.
std::shared_ptr<const meta::Metamodel> runtime_metamodel();

/// "Socket" for smart plugs, "Device" otherwise.
std::string_view runtime_class(sim::DeviceType type);

/// Root reference under which elements of the given type are linked.
std::string_view root_reference(sim::DeviceType type);

struct DescriptorAttr {
  std::string name;
  meta::AttrType type;
};

/// How the connector reaches and interprets one device. poll_interval counts
/// host ticks between polls.
struct DeviceDescriptor {
  std::string dev_id;
  sim::DeviceType device_type = sim::DeviceType::PlantMonitor;
  std::string base_url;  // empty: the host's simulator endpoint
  std::vector<DescriptorAttr> readable;
  std::vector<DescriptorAttr> writable;
  int poll_interval = 1;
  int offline_after = 3;

  const DescriptorAttr* find_readable(std::string_view name) const;
  const DescriptorAttr* find_writable(std::string_view name) const;
};

/// Descriptor with the full wire schema of `type` as its readable and
/// writable sets.
DeviceDescriptor default_descriptor(std::string dev_id, sim::DeviceType type);

enum class RuntimeErrc { DuplicateDevice, DescriptorInvalid, UnknownDevice, ReadOnlyAttribute,
                         TypeMismatch, DeviceOffline, WriteFailed };

std::string_view to_string(RuntimeErrc code);

class RuntimeError : public Error {
 public:
  RuntimeError(RuntimeErrc code, const std::string& what)
      : Error(std::string(to_string(code)) + ": " + what), code_(code) {}
  RuntimeErrc code() const noexcept { return code_; }

 private:
  RuntimeErrc code_;
};

/// Problems that make a descriptor unusable: bad interval or threshold,
/// attributes missing from the runtime class or the wire schema, writable
/// attributes the device does not accept.
std::vector<std::string> descriptor_problems(const DeviceDescriptor& d);

/// Reads the "devices" array of a roster document. Each entry may carry
/// "base_url", "poll_interval", "offline_after" and "readable" / "writable"
/// objects mapping attribute names to type names; omitted sets default to
/// the wire schema. Problems are reported with JSON pointers and do not stop
/// the scan.
std::vector<DeviceDescriptor> descriptors_from_json(const nlohmann::json& roster,
                                                    const std::string& file,
                                                    std::vector<Diagnostic>& diags);

}  // namespace rtm::runtime
