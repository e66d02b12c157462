#include "rtm/host/event_loop.hpp"

#include <iostream>

namespace rtm::host {

EventLoop::EventLoop(std::unique_ptr<Host> host, bool timer)
    : host_(std::move(host)), timer_(timer), thread_([this] { run(); }) {}

EventLoop::~EventLoop() { stop(); }

void EventLoop::post(std::function<void(Host&)> task) {
  {
    std::lock_guard lock(mutex_);
    if (stopping_) throw Error("event loop stopped");
    tasks_.push_back(std::move(task));
  }
  cv_.notify_one();
}

void EventLoop::stop() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  cv_.notify_one();
  if (thread_.joinable()) thread_.join();
}

void EventLoop::run() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::milliseconds(host_->config().tick_ms);
  auto next_tick = clock::now() + period;
  std::unique_lock lock(mutex_);
  for (;;) {
    if (timer_) {
      cv_.wait_until(lock, next_tick, [&] { return stopping_ || !tasks_.empty(); });
    } else {
      cv_.wait(lock, [&] { return stopping_ || !tasks_.empty(); });
    }
    // Pending tasks still run on stop so no caller waits forever.
    while (!tasks_.empty()) {
      auto task = std::move(tasks_.front());
      tasks_.pop_front();
      lock.unlock();
      task(*host_);
      lock.lock();
    }
    if (stopping_) return;
    if (timer_ && clock::now() >= next_tick) {
      lock.unlock();
      try {
        host_->tick();
      } catch (const std::exception& e) {
        std::cerr << "tick failed: " << e.what() << '\n';
      }
      lock.lock();
      next_tick += period;
      if (next_tick < clock::now()) next_tick = clock::now() + period;
    }
  }
}

}  // namespace rtm::host
