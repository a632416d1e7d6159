#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <string_view>

#include "json.hpp"

namespace parafuse::remote {

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string path;  // no trailing slash; may be empty

  // Throws InputError on anything but http(s)://host[:port][/path].
  static Url parse(std::string_view text);
  std::string origin() const;  // scheme://host:port
};

struct RetryPolicy {
  int max_retries = 5;
  std::chrono::milliseconds backoff_base{1000};  // doubles after every failed attempt
};

struct ClientConfig {
  // Base URL of an OpenAI-compatible API, e.g. "https://api.openai.com/v1".
  std::string base_url;
  // Sent as "Authorization: Bearer <key>" when non-empty.
  std::string api_key;
  RetryPolicy retry;
  int max_in_flight = 4;
  // Token-bucket limit; 0 disables it.
  double requests_per_second = 0.0;
  std::chrono::seconds timeout{60};
};

// Returns the variable's value or "" when unset.
std::string api_key_from_env(const char* variable);

class RateLimiter {
 public:
  // Bucket holds up to max(1, rate) tokens and refills at `rate` per second.
  explicit RateLimiter(double rate);
  void acquire();

 private:
  double rate_;
  double capacity_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mutex_;
};

// POSTs JSON bodies and returns parsed JSON responses. Safe to call from many
// threads; at most max_in_flight requests are outstanding at once.
//
// Connection failures, 429 and 5xx responses are retried with exponential
// backoff. Other statuses and malformed bodies fail immediately. Every
// failure surfaces as RemoteError.
class JsonClient {
 public:
  explicit JsonClient(ClientConfig config);
  ~JsonClient();
  JsonClient(const JsonClient&) = delete;
  JsonClient& operator=(const JsonClient&) = delete;

  // `route` is appended to the base URL path, e.g. "/chat/completions".
  nlohmann::json post(std::string_view route, const nlohmann::json& body);

  const ClientConfig& config() const { return config_; }

 private:
  ClientConfig config_;
  Url base_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
  std::unique_ptr<RateLimiter> limiter_;
};

}  // namespace parafuse::remote
