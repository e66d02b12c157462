#include "rtm/net/http.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>

#include "rtm/meta/json.hpp"

namespace rtm::net {

using nlohmann::json;

HttpTransport::HttpTransport(const std::string& base_url)
    : client_(std::make_unique<httplib::Client>(base_url)) {
  client_->set_connection_timeout(1, 0);
  client_->set_read_timeout(2, 0);
  client_->set_write_timeout(2, 0);
  client_->set_keep_alive(true);
}

HttpTransport::~HttpTransport() = default;

sim::WireResponse HttpTransport::exchange(const sim::WireRequest& req) {
  std::lock_guard lock(mutex_);
  httplib::Result res;
  if (req.method == "GET") res = client_->Get(req.path);
  else if (req.method == "PUT") res = client_->Put(req.path, req.body, "application/json");
  else if (req.method == "POST") res = client_->Post(req.path, req.body, "application/json");
  else return {0, {}};
  if (!res) return {0, {}};
  return {res->status, res->body};
}

host::TransportFactory http_transports(const std::string& fallback) {
  // Devices sharing an endpoint share one connection.
  auto pool = std::make_shared<std::map<std::string, std::shared_ptr<HttpTransport>>>();
  return [pool, fallback](const runtime::DeviceDescriptor& d) -> std::shared_ptr<runtime::DeviceTransport> {
    const std::string& url = d.base_url.empty() ? fallback : d.base_url;
    auto& slot = (*pool)[url];
    if (!slot) slot = std::make_shared<HttpTransport>(url);
    return slot;
  };
}

namespace {

int start_server(httplib::Server& server, std::thread& thread, const host::Endpoint& at) {
  int port = at.port;
  if (port == 0) {
    port = server.bind_to_any_port(at.host);
    if (port < 0) throw Error("cannot bind " + at.host);
  } else if (!server.bind_to_port(at.host, port)) {
    throw Error("cannot bind " + at.host + ":" + std::to_string(port));
  }
  thread = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  return port;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                const std::vector<Diagnostic>& diags = {}) {
  json body{{"error", code}, {"message", message}};
  if (!diags.empty()) {
    json list = json::array();
    for (const auto& d : diags) list.push_back(host::to_json(d));
    body["diagnostics"] = std::move(list);
  }
  send_json(res, status, body);
}

}  // namespace

SimServer::SimServer(std::shared_ptr<sim::SimService> service)
    : service_(std::move(service)), server_(std::make_unique<httplib::Server>()) {
  auto handler = [svc = service_](const httplib::Request& req, httplib::Response& res) {
    auto out = svc->handle({req.method, req.path, req.body});
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  server_->Get(".*", handler);
  server_->Put(".*", handler);
  server_->Post(".*", handler);
}

SimServer::~SimServer() { stop(); }

int SimServer::start(const host::Endpoint& at) { return start_server(*server_, thread_, at); }

void SimServer::stop() {
  if (server_->is_running()) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::shared_ptr<EventHub::Subscriber> EventHub::subscribe() {
  auto s = std::make_shared<Subscriber>();
  std::lock_guard lock(mutex_);
  subs_.push_back(s);
  return s;
}

void EventHub::unsubscribe(const std::shared_ptr<Subscriber>& s) {
  std::lock_guard lock(mutex_);
  subs_.erase(std::remove(subs_.begin(), subs_.end(), s), subs_.end());
}

void EventHub::publish(const std::string& kind, const std::string& data) {
  const std::string frame = "event: " + kind + "\ndata: " + data + "\n\n";
  std::lock_guard lock(mutex_);
  for (const auto& s : subs_) {
    {
      std::lock_guard sl(s->mutex);
      s->queue.push_back(frame);
    }
    s->cv.notify_one();
  }
}

void EventHub::close_all() {
  std::lock_guard lock(mutex_);
  for (const auto& s : subs_) {
    {
      std::lock_guard sl(s->mutex);
      s->closed = true;
    }
    s->cv.notify_one();
  }
}

std::size_t EventHub::subscribers() const {
  std::lock_guard lock(mutex_);
  return subs_.size();
}

ApiServer::ApiServer(host::EventLoop& loop, bool test_mode)
    : loop_(loop), test_mode_(test_mode), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;
  // Maps host failures onto status codes; every handler body runs inside.
  auto guarded = [](auto body) {
    return [body](const httplib::Request& req, httplib::Response& res) {
      try {
        body(req, res);
      } catch (const host::HostError& e) {
        int status = 500;
        switch (e.code()) {
          case host::HostErrc::NotFound: status = 404; break;
          case host::HostErrc::InvalidRequest: status = 400; break;
          case host::HostErrc::Rejected: status = 409; break;
          case host::HostErrc::TestModeOnly: status = 404; break;
          case host::HostErrc::Startup: status = 500; break;
        }
        static constexpr std::string_view names[] = {"StartupFailed", "NotFound", "InvalidRequest",
                                                     "ValidationFailed", "TestModeOnly"};
        send_error(res, status, names[static_cast<int>(e.code())], e.what(), e.diagnostics());
      } catch (const std::exception& e) {
        send_error(res, 500, "InternalError", e.what());
      }
    };
  };
  auto object_body = [](const httplib::Request& req) {
    auto j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw host::HostError(host::HostErrc::InvalidRequest, "body must be a JSON object");
    }
    return j;
  };

  srv.Get("/api/scenario", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, loop_.call([](host::Host& h) { return h.scenario_json(); }));
  }));
  srv.Get("/api/runtime", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, loop_.call([](host::Host& h) { return h.runtime_json(); }));
  }));
  srv.Get("/api/notifications", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, loop_.call([](host::Host& h) { return h.notifications_json(); }));
  }));
  srv.Get("/api/diagnostics", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, loop_.call([](host::Host& h) { return h.diagnostics_json(); }));
  }));
  srv.Post("/api/plant/name", guarded([this, object_body](const httplib::Request& req, httplib::Response& res) {
    auto body = object_body(req);
    if (!body.contains("name") || !body["name"].is_string()) {
      throw host::HostError(host::HostErrc::InvalidRequest, "body needs a \"name\" string");
    }
    auto name = body["name"].get<std::string>();
    auto events = loop_.call([name](host::Host& h) { return h.set_plant_name(name).size(); });
    send_json(res, 200, {{"name", name}, {"events", events}});
  }));
  srv.Post(R"(/api/actuator/([^/]+))",
           guarded([this, object_body](const httplib::Request& req, httplib::Response& res) {
    auto body = object_body(req);
    if (!body.contains("on") || !body["on"].is_boolean()) {
      throw host::HostError(host::HostErrc::InvalidRequest, "body needs a boolean \"on\"");
    }
    std::string id = req.matches[1];
    bool on = body["on"].get<bool>();
    send_json(res, 200, loop_.call([id, on](host::Host& h) { return h.set_actuator(id, on); }));
  }));
  srv.Put("/api/rules", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto r = loop_.call([xml = req.body](host::Host& h) { return h.reload_rules(xml); });
    send_json(res, 200, {{"changed", r.changed}, {"version", r.version}});
  }));
  srv.Post("/api/tick", guarded([this](const httplib::Request& req, httplib::Response& res) {
    if (!test_mode_) throw host::HostError(host::HostErrc::TestModeOnly, "ticks are manual only in test mode");
    int count = 1;
    if (!req.body.empty()) {
      auto j = json::parse(req.body, nullptr, false);
      if (j.is_discarded() || !j.is_object() || (j.contains("count") && !j["count"].is_number_integer())) {
        throw host::HostError(host::HostErrc::InvalidRequest, "body may only hold an integer \"count\"");
      }
      count = j.value("count", 1);
      if (count < 1) throw host::HostError(host::HostErrc::InvalidRequest, "count must be >= 1");
    }
    auto out = loop_.call([count](host::Host& h) {
      for (int i = 0; i < count; ++i) h.tick();
      return json{{"tick", h.ticks()}, {"sim_time", h.sim_time()}};
    });
    send_json(res, 200, out);
  }));
  srv.Get("/api/events", [this](const httplib::Request&, httplib::Response& res) {
    auto sub = hub_.subscribe();
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [sub](std::size_t, httplib::DataSink& sink) {
          std::unique_lock lock(sub->mutex);
          sub->cv.wait_for(lock, std::chrono::seconds(1),
                           [&] { return sub->closed || !sub->queue.empty(); });
          if (sub->closed) return false;
          if (sub->queue.empty()) {
            static const std::string keepalive = ": keepalive\n\n";
            return sink.write(keepalive.data(), keepalive.size());
          }
          while (!sub->queue.empty()) {
            std::string frame = std::move(sub->queue.front());
            sub->queue.pop_front();
            if (!sink.write(frame.data(), frame.size())) return false;
          }
          return true;
        },
        [this, sub](bool) { hub_.unsubscribe(sub); });
  });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const host::Endpoint& at) { return start_server(*server_, thread_, at); }

void ApiServer::stop() {
  hub_.close_all();
  if (server_->is_running()) server_->stop();
  if (thread_.joinable()) thread_.join();
}

host::Host::EventSink ApiServer::sink() {
  return [this](const json& message) {
    const std::string kind = message.value("type", "change");
    const json& payload = kind == "notification" ? message["notification"] : message["event"];
    hub_.publish(kind, payload.dump());
  };
}

}  // namespace rtm::net
