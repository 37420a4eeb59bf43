#pragma once

#include <cstdint>
#include <string>

#include "dyve/backend.hpp"

namespace dyve {

// Connection settings for a chat-completions HTTP endpoint. base_url and
// api_key fall back to the DYVE_API_BASE / DYVE_API_KEY environment variables
// when left empty.
struct HttpBackendConfig {
  std::string base_url;       // e.g. "http://127.0.0.1:8080/v1"
  std::string api_key;        // sent as "Authorization: Bearer <key>" when set
  std::string model = "default";
  int max_attempts = 3;       // total tries per request
  int backoff_base_ms = 1000; // first retry delay; doubles per attempt
  int timeout_seconds = 120;  // per-request read timeout
  int max_in_flight = 32;     // concurrent request bound across all threads

  void validate() const;
};

// Chat-completions client: POSTs {model, messages, temperature, max_tokens,
// n, seed} to <base>/chat/completions and returns the choices' message
// contents. Retries transient failures (connect errors, 408/429/5xx) with
// exponential backoff, then throws transport_error. Safe for concurrent use;
// in-flight requests are bounded by max_in_flight.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  std::vector<std::string> complete(const CompletionRequest& request) override;

  const HttpBackendConfig& config() const { return config_; }

  // Serialized request body; exposed for wire-format tests.
  static std::string request_body(const CompletionRequest& request, const std::string& model);

 private:
  struct Gate;  // bounds in-flight requests
  HttpBackendConfig config_;
  std::string host_;         // scheme://host:port
  std::string path_prefix_;  // path portion of base_url, no trailing slash
  std::unique_ptr<Gate> gate_;
};

}  // namespace dyve
