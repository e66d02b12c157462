#pragma once

#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "rtm/host/config.hpp"
#include "rtm/host/event_loop.hpp"
#include "rtm/runtime/connector.hpp"
#include "rtm/sim/service.hpp"

namespace httplib {
class Server;
class Client;
}  // namespace httplib

namespace rtm::net {

/// Device transport over HTTP. Connection failures and timeouts answer
/// status 0.
class HttpTransport : public runtime::DeviceTransport {
 public:
  explicit HttpTransport(const std::string& base_url);
  ~HttpTransport() override;
  sim::WireResponse exchange(const sim::WireRequest& req) override;

 private:
  std::mutex mutex_;
  std::unique_ptr<httplib::Client> client_;
};

/// Transport factory for external mode: each device's base_url, or
/// `fallback` when the descriptor leaves it empty.
host::TransportFactory http_transports(const std::string& fallback);

/// Serves a SimService on the device wire protocol.
class SimServer {
 public:
  explicit SimServer(std::shared_ptr<sim::SimService> service);
  ~SimServer();

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Returns the bound port; throws Error when binding fails.
  int start(const host::Endpoint& at);
  void stop();

 private:
  std::shared_ptr<sim::SimService> service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

/// Fan-out of server-sent events. Thread-safe.
class EventHub {
 public:
  struct Subscriber {
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<std::string> queue;
    bool closed = false;
  };

  std::shared_ptr<Subscriber> subscribe();
  void unsubscribe(const std::shared_ptr<Subscriber>& s);
  /// `kind` becomes the SSE event name, `data` the single data line.
  void publish(const std::string& kind, const std::string& data);
  void close_all();
  std::size_t subscribers() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::shared_ptr<Subscriber>> subs_;
};

/// Host status and control API under /api/. Every handler talks to the host
/// through the event loop.
class ApiServer {
 public:
  ApiServer(host::EventLoop& loop, bool test_mode);
  ~ApiServer();

  int start(const host::Endpoint& at);
  void stop();

  /// Sink to install on the Host so changes reach /api/events.
  host::Host::EventSink sink();
  EventHub& hub() { return hub_; }

 private:
  host::EventLoop& loop_;
  bool test_mode_;
  EventHub hub_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace rtm::net
