#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <thread>
#include <type_traits>

#include "rtm/host/host.hpp"

namespace rtm::host {

/// Owns a Host on one thread. Other threads reach it only through posted
/// tasks, which run between ticks, so every snapshot is taken at a tick
/// boundary. With a timer the loop ticks every tick_ms of wall time.
class EventLoop {
 public:
  EventLoop(std::unique_ptr<Host> host, bool timer);
  ~EventLoop();

  EventLoop(const EventLoop&) = delete;
  EventLoop& operator=(const EventLoop&) = delete;

  void post(std::function<void(Host&)> task);

  /// Runs `fn` on the loop thread and waits for its result. Exceptions are
  /// rethrown in the caller.
  template <typename Fn>
  auto call(Fn&& fn) -> std::invoke_result_t<Fn&, Host&> {
    using R = std::invoke_result_t<Fn&, Host&>;
    auto promise = std::make_shared<std::promise<R>>();
    auto future = promise->get_future();
    post([promise, fn = std::forward<Fn>(fn)](Host& h) mutable {
      try {
        if constexpr (std::is_void_v<R>) {
          fn(h);
          promise->set_value();
        } else {
          promise->set_value(fn(h));
        }
      } catch (...) {
        promise->set_exception(std::current_exception());
      }
    });
    return future.get();
  }

  void stop();

 private:
  void run();

  std::unique_ptr<Host> host_;
  bool timer_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::function<void(Host&)>> tasks_;
  bool stopping_ = false;
  std::thread thread_;
};

}  // namespace rtm::host
