#include "parafuse/remote.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "parafuse/error.hpp"

namespace parafuse::remote {
namespace {

bool retryable(int status) { return status == 429 || status >= 500; }

// Releases an in-flight slot on scope exit.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

}  // namespace

Url Url::parse(std::string_view text) {
  Url url;
  const size_t sep = text.find("://");
  if (sep == std::string_view::npos) throw InputError("URL lacks a scheme: " + std::string(text));
  url.scheme = std::string(text.substr(0, sep));
  if (url.scheme != "http" && url.scheme != "https") {
    throw InputError("unsupported URL scheme: " + url.scheme);
  }
  std::string_view rest = text.substr(sep + 3);
  const size_t slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  url.path = slash == std::string_view::npos ? "" : std::string(rest.substr(slash));
  while (!url.path.empty() && url.path.back() == '/') url.path.pop_back();
  const size_t colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    url.host = std::string(authority.substr(0, colon));
    try {
      url.port = std::stoi(std::string(authority.substr(colon + 1)));
    } catch (const std::exception&) {
      throw InputError("bad port in URL: " + std::string(text));
    }
  } else {
    url.host = std::string(authority);
    url.port = url.scheme == "https" ? 443 : 80;
  }
  if (url.host.empty()) throw InputError("URL lacks a host: " + std::string(text));
  return url;
}

std::string Url::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

std::string api_key_from_env(const char* variable) {
  const char* value = std::getenv(variable);
  return value ? std::string(value) : std::string();
}

RateLimiter::RateLimiter(double rate)
    : rate_(rate),
      capacity_(std::max(1.0, rate)),
      tokens_(std::max(1.0, rate)),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  for (;;) {
    std::chrono::duration<double> wait{};
    {
      std::lock_guard lock(mutex_);
      const auto now = std::chrono::steady_clock::now();
      tokens_ = std::min(capacity_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
      last_ = now;
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    }
    std::this_thread::sleep_for(wait);
  }
}

JsonClient::JsonClient(ClientConfig config)
    : config_(std::move(config)),
      base_(Url::parse(config_.base_url)),
      in_flight_(std::make_unique<std::counting_semaphore<>>(std::max(1, config_.max_in_flight))) {
  if (config_.requests_per_second > 0) limiter_ = std::make_unique<RateLimiter>(config_.requests_per_second);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (base_.scheme == "https") throw InputError("built without TLS support; https endpoints unavailable");
#endif
}

JsonClient::~JsonClient() = default;

nlohmann::json JsonClient::post(std::string_view route, const nlohmann::json& body) {
  const std::string path = base_.path + std::string(route);
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  int last_status = 0;
  auto delay = config_.retry.backoff_base;
  for (int attempt = 0; attempt <= config_.retry.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    if (limiter_) limiter_->acquire();
    httplib::Result result;
    {
      SlotGuard slot(*in_flight_);
      httplib::Client client(base_.origin());
      client.set_connection_timeout(config_.timeout);
      client.set_read_timeout(config_.timeout);
      client.set_write_timeout(config_.timeout);
      result = client.Post(path, headers, payload, "application/json");
    }
    if (!result) {
      last_status = 0;
      last_error = "connection failed: " + httplib::to_string(result.error());
      continue;
    }
    last_status = result->status;
    if (result->status >= 200 && result->status < 300) {
      try {
        return nlohmann::json::parse(result->body);
      } catch (const nlohmann::json::parse_error&) {
        throw RemoteError("POST " + path + ": response is not JSON", result->status);
      }
    }
    last_error = "HTTP " + std::to_string(result->status);
    if (!retryable(result->status)) break;
  }
  throw RemoteError("POST " + path + " failed: " + last_error, last_status);
}

}  // namespace parafuse::remote
