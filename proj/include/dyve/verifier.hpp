#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dyve/backend.hpp"
#include "dyve/core.hpp"

namespace dyve::verifier {

// What to do when a response parses to neither "+" nor "-".
enum class UnparseablePolicy { TreatAsIncorrect, TreatAsCorrect, Abort };

struct VerifierConfig {
  std::shared_ptr<Backend> backend;
  int max_tokens = kMaxResponseTokens;  // within [1, 8192]
  double temperature = 0.0;
  UnparseablePolicy unparseable_policy = UnparseablePolicy::TreatAsIncorrect;
  std::string prompt_template = "stepwise-v1";
  std::optional<uint64_t> seed;

  void validate() const;
};

struct VerificationResult {
  // 0-based first error, or -1 when every step verified correct.
  FirstErrorLabel classification;
  // Raw response per verified step; |generations| = |verdicts| =
  // (classification == -1 ? T : classification + 1).
  std::vector<std::string> generations;
  // Effective verdicts after policy mapping: all Correct except possibly the
  // last. The unmapped raw text lives in `generations`.
  std::vector<Verdict> verdicts;
  // Simulated seconds (calls x virtual cost) for scripted backends, measured
  // wall-clock for live ones.
  double seconds = 0.0;
};

// Thrown when the backend fails mid-trace; carries what was verified so far.
class verification_error : public transport_error {
 public:
  verification_error(const std::string& what, VerificationResult partial)
      : transport_error(what), partial_(std::move(partial)) {}
  const VerificationResult& partial() const { return partial_; }

 private:
  VerificationResult partial_;
};

// ============================================================================
// Prompt construction ("stepwise-v1")
// ============================================================================

// Conversation asking about step t (1-based): the first user turn carries the
// problem statement and step 1; each later step appends the prior exchange
// (assistant responses from prior_responses) plus a new user turn. Every user
// turn ends with the literal step question.
std::vector<ChatMessage> build_step_prompt(const Problem& problem,
                                           const std::vector<Step>& steps, int t,
                                           const std::vector<std::string>& prior_responses);

// ============================================================================
// Response parsing
// ============================================================================

// Removes every <think>...</think> span; an unclosed <think> removes the rest
// of the string.
std::string strip_think_blocks(const std::string& text);

// Contents of the first think block, if any (unclosed blocks run to the end).
std::optional<std::string> first_think_body(const std::string& text);

// Verdict of a response: after stripping think blocks, the last whitespace
// token decides — "+" is Correct, "-" is Incorrect (an immediately preceding
// or fused "Answer:" is unwrapped), anything else is Unparseable. When a
// response carries several verdict tokens outside the think block, the final
// one wins.
Verdict parse_verdict(const std::string& response);

// ============================================================================
// Sequential verification
// ============================================================================

// Verifies steps left to right, one backend call per step, halting on the
// first non-Correct effective verdict: classification t-1 after halting at
// step t, or -1 when all pass. The prompt for step t never sees steps beyond
// t. Throws domain_error for empty traces, verification_error on backend
// failure, and domain_error under the Abort policy.
VerificationResult verify_trace(const Problem& problem, const std::vector<Step>& steps,
                                const VerifierConfig& config);

}  // namespace dyve::verifier
