#pragma once

#include <stdexcept>
#include <string>

namespace parafuse {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data or configuration. The CLI maps these to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

// A remote service (LLM, moderation, embedding endpoint) failed after retries.
// The CLI maps these to exit code 2 in strict mode.
class RemoteError : public Error {
 public:
  RemoteError(const std::string& what, int status = 0) : Error(what), status_(status) {}

  // HTTP status of the last attempt, 0 when no response was received.
  int status() const { return status_; }

 private:
  int status_;
};

}  // namespace parafuse
