#pragma once

#include <functional>
#include <mutex>
#include <string>

#include <json.hpp>

#include "rtm/sim/fleet.hpp"

namespace rtm::sim {

struct WireRequest {
  std::string method;  // "GET", "PUT", "POST"
  std::string path;
  std::string body;
};

/// status 0 means the request never reached a device endpoint.
struct WireResponse {
  int status = 0;
  std::string body;

  bool ok() const { return status >= 200 && status < 300; }
};

/// {"dev_id", "device_type", "attrs": {...}} with attrs in schema order.
nlohmann::ordered_json state_to_json(const SimDevice& d);

/// The device wire protocol over a fleet. Every request is linearized by one
/// mutex, so the HTTP server and in-process callers may share an instance.
///
///   GET  /devices
///   GET  /devices/{id}/state
///   PUT  /devices/{id}/state          {"attrs": {...}}
///   POST /devices/{id}/recognize      {"plant_name": "..."}
///   POST /sim/step                    {"dt_hours": x}          test mode
///   POST /sim/devices/{id}/fault      {"offline": b}           test mode
///   POST /sim/devices/{id}/inject     {"attrs": {...}}         test mode
///
/// Errors answer {"error": code, "message": text} with 400, 404, 422 or 503.
class SimService {
 public:
  SimService(Fleet fleet, bool test_mode);

  WireResponse handle(const WireRequest& req);

  /// Runs `fn` with exclusive access to the fleet.
  template <typename Fn>
  decltype(auto) with_fleet(Fn&& fn) {
    std::lock_guard lock(mutex_);
    return fn(fleet_);
  }

  bool test_mode() const { return test_mode_; }

 private:
  WireResponse route(const WireRequest& req);

  std::mutex mutex_;
  Fleet fleet_;
  bool test_mode_;
};

}  // namespace rtm::sim
