#pragma once

#include <stdexcept>
#include <string>

namespace dyve {

// Caller broke an operation's stated precondition.
class contract_error : public std::logic_error {
 public:
  explicit contract_error(const std::string& what) : std::logic_error(what) {}
};

// Input data is outside the domain an operation supports (e.g. a trace that
// does not belong to the synthetic task family).
class domain_error : public std::runtime_error {
 public:
  explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// File / stream problems. Carries an optional 1-based line number for
// record-oriented inputs.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what, long line = -1)
      : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// A backend endpoint could not be reached after the configured retries.
class transport_error : public std::runtime_error {
 public:
  explicit transport_error(const std::string& what) : std::runtime_error(what) {}
};

// Bad run configuration (unknown key, missing seed, invalid value).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dyve
