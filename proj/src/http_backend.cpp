#include "dyve/http_backend.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace dyve {

using nlohmann::json;

void HttpBackendConfig::validate() const {
  if (max_attempts < 1) throw config_error("backend: max_attempts must be >= 1");
  if (backoff_base_ms < 0) throw config_error("backend: backoff_base_ms must be >= 0");
  if (timeout_seconds < 1) throw config_error("backend: timeout_seconds must be >= 1");
  if (max_in_flight < 1) throw config_error("backend: max_in_flight must be >= 1");
}

// Counting gate over in-flight requests (a semaphore with a runtime bound).
struct HttpBackend::Gate {
  explicit Gate(int limit) : slots(limit) {}

  void acquire() {
    std::unique_lock lock(mutex);
    ready.wait(lock, [&] { return slots > 0; });
    --slots;
  }
  void release() {
    {
      std::lock_guard lock(mutex);
      ++slots;
    }
    ready.notify_one();
  }

  std::mutex mutex;
  std::condition_variable ready;
  int slots;
};

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* value = std::getenv(name);
  return (value && *value) ? std::string(value) : std::move(fallback);
}

// Splits "http://host:port/path" into scheme://host:port and /path.
void split_base_url(const std::string& base, std::string& host, std::string& path) {
  const size_t scheme_end = base.find("://");
  if (scheme_end == std::string::npos) {
    throw config_error("backend: base URL must start with http:// — got '" + base + "'");
  }
  const std::string scheme = base.substr(0, scheme_end);
  if (scheme == "https") {
    throw config_error("backend: this build speaks plain http only; terminate TLS in a proxy");
  }
  if (scheme != "http") {
    throw config_error("backend: unsupported URL scheme '" + scheme + "'");
  }
  const size_t path_start = base.find('/', scheme_end + 3);
  host = (path_start == std::string::npos) ? base : base.substr(0, path_start);
  path = (path_start == std::string::npos) ? "" : base.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
}

bool retryable_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) config_.base_url = env_or("DYVE_API_BASE", "");
  if (config_.api_key.empty()) config_.api_key = env_or("DYVE_API_KEY", "");
  config_.validate();
  if (config_.base_url.empty()) {
    throw config_error("backend: no base URL (set backend.base_url or DYVE_API_BASE)");
  }
  split_base_url(config_.base_url, host_, path_prefix_);
  gate_ = std::make_unique<Gate>(config_.max_in_flight);
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::request_body(const CompletionRequest& request,
                                      const std::string& model) {
  json body;
  body["model"] = model;
  json messages = json::array();
  for (const ChatMessage& message : request.messages) {
    messages.push_back({{"role", role_name(message.role)}, {"content", message.content}});
  }
  body["messages"] = std::move(messages);
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  body["n"] = request.n;
  if (request.seed) body["seed"] = *request.seed;
  return body.dump();
}

std::vector<std::string> HttpBackend::complete(const CompletionRequest& request) {
  request.validate();
  count_call();

  gate_->acquire();
  struct Release {
    Gate* gate;
    ~Release() { gate->release(); }
  } release{gate_.get()};

  const std::string body = request_body(request, config_.model);
  const std::string path = path_prefix_ + "/chat/completions";

  std::string last_error;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(config_.backoff_base_ms << (attempt - 1)));
    }
    // One client per request: keep-alive sockets in this library are not safe
    // to share across threads, and connection setup is not the bottleneck.
    httplib::Client client(host_);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    auto result = client.Post(path, headers, body, "application/json");
    if (!result) {
      last_error = "connection failed: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status != 200) {
      last_error = "HTTP " + std::to_string(result->status) + ": " +
                   result->body.substr(0, 200);
      if (retryable_status(result->status)) continue;
      throw transport_error("backend request rejected — " + last_error);
    }

    json parsed;
    try {
      parsed = json::parse(result->body);
    } catch (const json::parse_error& e) {
      throw transport_error(std::string("backend returned unparseable JSON: ") + e.what());
    }
    if (!parsed.contains("choices") || !parsed["choices"].is_array()) {
      throw transport_error("backend response has no choices array");
    }
    std::vector<std::string> texts;
    for (const auto& choice : parsed["choices"]) {
      texts.push_back(choice.at("message").at("content").get<std::string>());
    }
    if (static_cast<int>(texts.size()) != request.n) {
      throw transport_error("backend returned " + std::to_string(texts.size()) +
                            " choices, expected " + std::to_string(request.n));
    }
    return texts;
  }
  throw transport_error("backend unreachable after " + std::to_string(config_.max_attempts) +
                        " attempts — last error: " + last_error);
}

}  // namespace dyve
