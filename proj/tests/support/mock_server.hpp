#pragma once

// In-process HTTP server for exercising the remote clients.

#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

namespace mock {

struct Captured {
  std::string path;
  std::string body;
  std::string authorization;
};

class Server {
 public:
  using Handler = std::function<void(const nlohmann::json& body, httplib::Response& res)>;

  Server() {
    server_.Post(R"(/v1/(.*))", [this](const httplib::Request& req, httplib::Response& res) {
      Handler handler;
      {
        std::lock_guard lock(mutex_);
        captured_.push_back({req.path, req.body, req.get_header_value("Authorization")});
        auto it = handlers_.find(req.path.substr(3));
        if (it != handlers_.end()) handler = it->second;
      }
      if (!handler) {
        res.status = 404;
        return;
      }
      handler(nlohmann::json::parse(req.body), res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~Server() {
    server_.stop();
    thread_.join();
  }

  // route such as "/chat/completions"
  void on(const std::string& route, Handler handler) {
    std::lock_guard lock(mutex_);
    handlers_[route] = std::move(handler);
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  std::vector<Captured> captured() const {
    std::lock_guard lock(mutex_);
    return captured_;
  }

  size_t count(const std::string& route) const {
    std::lock_guard lock(mutex_);
    size_t n = 0;
    for (const auto& c : captured_) n += c.path == "/v1" + route;
    return n;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex mutex_;
  std::map<std::string, Handler> handlers_;
  std::vector<Captured> captured_;
};

inline void reply_json(httplib::Response& res, const nlohmann::json& j) {
  res.set_content(j.dump(), "application/json");
}

inline nlohmann::json chat_reply(const std::string& content) {
  return {{"choices", nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}};
}

inline nlohmann::json moderation_reply(const std::vector<std::string>& flagged) {
  static const char* kCats[] = {"sexual",           "hate",
                                "harassment",       "self-harm",
                                "sexual/minors",    "hate/threatening",
                                "violence/graphic", "self-harm/instructions",
                                "self-harm/intent", "harassment/threatening",
                                "violence"};
  nlohmann::json cats = nlohmann::json::object();
  for (const char* c : kCats) cats[c] = false;
  for (const auto& f : flagged) cats[f] = true;
  return {{"results", nlohmann::json::array({{{"flagged", !flagged.empty()}, {"categories", cats}}})}};
}

}  // namespace mock
