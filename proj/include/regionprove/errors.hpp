#pragma once

#include <stdexcept>
#include <string>

namespace regionprove {

// Malformed input file (.nnet, network/property JSON, regions CSV).
// `line` is 1-based when known, 0 otherwise.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& message, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

// Raised by run_eprove when EngineConfig::time_limit_s is exceeded.
class TimeoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace regionprove
