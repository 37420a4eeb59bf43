#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dyve/core.hpp"
#include "dyve/errors.hpp"

namespace dyve {

// ============================================================================
// Chat-completion abstraction
// ============================================================================

enum class Role { System, User, Assistant };

struct ChatMessage {
  Role role = Role::User;
  std::string content;
};

constexpr int kMaxResponseTokens = 8192;

// The literal question that closes every step-verification user turn. Both
// prompt construction and the scripted oracle's prompt parsing key off it.
inline constexpr const char* kStepQuestion =
    "Is this step correct? Answer with '+' for correct or '-' for incorrect.";

// The assistant turn emitted for a confidently correct step: an empty think
// block followed by the "+" token.
inline constexpr const char* kFastReply = "<think>\n</think> +";

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  int max_tokens = kMaxResponseTokens;  // within [1, 8192]
  double temperature = 0.7;
  int n = 1;
  std::optional<uint64_t> seed;

  void validate() const {
    if (max_tokens < 1 || max_tokens > kMaxResponseTokens) {
      throw contract_error("completion request: max_tokens must be in [1, 8192]");
    }
    if (n < 1) throw contract_error("completion request: n must be >= 1");
    if (temperature < 0.0) throw contract_error("completion request: temperature must be >= 0");
  }
};

const char* role_name(Role role);
Role role_from_name(const std::string& name);

// Uniform interface over model endpoints. Implementations must be safe to
// call from many worker threads at once.
class Backend {
 public:
  virtual ~Backend() = default;

  // Returns exactly request.n response texts.
  virtual std::vector<std::string> complete(const CompletionRequest& request) = 0;

  // Deterministic per-call cost in seconds, when the backend simulates
  // latency instead of incurring it. Live backends return nullopt and are
  // timed with a real clock.
  virtual std::optional<double> virtual_cost_per_call() const { return std::nullopt; }

  // Total complete() invocations; used by resume tests and run summaries.
  uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }

 protected:
  void count_call() { calls_.fetch_add(1, std::memory_order_relaxed); }

 private:
  std::atomic<uint64_t> calls_{0};
};

// ============================================================================
// Completer interface (rollout sampling / MC estimation)
// ============================================================================

// A sampled continuation of a partial trace. `is_correct` reports whether the
// finished trace reaches the true final answer — the signal Monte Carlo
// estimation counts.
struct Completion {
  std::vector<Step> steps;   // continuation; indices follow the prefix
  std::string final_answer;  // answer stated by the completed trace
  bool is_correct = false;
};

// Samples completions of trace prefixes. Implementations must be thread-safe;
// scripted implementations must be a pure function of (prefix, sample_seed).
class Completer {
 public:
  virtual ~Completer() = default;

  virtual Completion complete(const ReasoningTrace& prefix, uint64_t sample_seed) = 0;

  // Total complete() invocations; lets resume tests assert zero new work.
  uint64_t samples_drawn() const { return samples_.load(std::memory_order_relaxed); }

 protected:
  void count_sample() { samples_.fetch_add(1, std::memory_order_relaxed); }

 private:
  std::atomic<uint64_t> samples_{0};
};

// ============================================================================
// Judge interface (consensus filtering)
// ============================================================================

struct JudgeDecision {
  bool agrees = false;
  std::string rationale;
};

class Judge {
 public:
  virtual ~Judge() = default;

  // Assesses whether `proposed` is the correct first-error annotation for the
  // trace. May throw transport_error for live endpoints.
  virtual JudgeDecision judge(const Problem& problem, const ReasoningTrace& trace,
                              FirstErrorLabel proposed) = 0;
};

// ============================================================================
// Deterministic in-process backends used by tests and desk-scale runs
// ============================================================================

// Always replies with the same text.
class ConstantBackend : public Backend {
 public:
  explicit ConstantBackend(std::string reply, double virtual_cost = 0.0)
      : reply_(std::move(reply)), virtual_cost_(virtual_cost) {}

  std::vector<std::string> complete(const CompletionRequest& request) override {
    request.validate();
    count_call();
    return std::vector<std::string>(static_cast<size_t>(request.n), reply_);
  }

  std::optional<double> virtual_cost_per_call() const override { return virtual_cost_; }

 private:
  std::string reply_;
  double virtual_cost_;
};

// Replays a canned list of responses in call order; wraps around when
// exhausted. Call order equals step order in the sequential verifier, which
// makes this the fixture backend for halting tests.
class TranscriptBackend : public Backend {
 public:
  explicit TranscriptBackend(std::vector<std::string> responses)
      : responses_(std::move(responses)) {}

  std::vector<std::string> complete(const CompletionRequest& request) override {
    request.validate();
    count_call();
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<std::string> out;
    out.reserve(static_cast<size_t>(request.n));
    for (int i = 0; i < request.n; ++i) {
      out.push_back(responses_[next_ % responses_.size()]);
      ++next_;
    }
    return out;
  }

  std::optional<double> virtual_cost_per_call() const override { return 0.0; }

 private:
  std::vector<std::string> responses_;
  std::mutex mutex_;
  size_t next_ = 0;
};

// Judge driven by a chat backend: renders a review prompt, asks for a
// constrained yes/no, and parses the reply. An unparseable reply counts as
// disagreement (conservative filtering); transport errors propagate.
class BackendJudge : public Judge {
 public:
  explicit BackendJudge(std::shared_ptr<Backend> backend, double temperature = 0.0,
                        uint64_t seed = 0)
      : backend_(std::move(backend)), temperature_(temperature), seed_(seed) {}

  JudgeDecision judge(const Problem& problem, const ReasoningTrace& trace,
                      FirstErrorLabel proposed) override;

  // Prompt template "judge-v1". Exposed for tests.
  static std::vector<ChatMessage> build_prompt(const Problem& problem,
                                                const ReasoningTrace& trace,
                                                FirstErrorLabel proposed);

 private:
  std::shared_ptr<Backend> backend_;
  double temperature_;
  uint64_t seed_;
};

}  // namespace dyve
