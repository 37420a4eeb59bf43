#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dyve/backend.hpp"
#include "dyve/core.hpp"
#include "dyve/verifier.hpp"

namespace dyve::selection {

// ============================================================================
// Answers
// ============================================================================

// Canonical answer form used for all equality checks: trims, unwraps any
// enclosing \boxed{...}, collapses internal whitespace, and lowercases purely
// alphabetic tokens. Idempotent by construction (applied to fixpoint).
std::string normalize_answer(const std::string& raw);

// Deterministic answer extraction from a trace's last step: the last
// \boxed{...} if present, else the text after the last "Answer:", else the
// text after the last '=', else the whole step.
std::string extract_final_answer(const ReasoningTrace& trace);

// ============================================================================
// Candidates
// ============================================================================

struct Candidate {
  ReasoningTrace trace;
  std::string final_answer;  // extract_final_answer(trace), unnormalized
  std::optional<verifier::VerificationResult> verification;
};

// Samples candidate solution traces for a problem. Implementations must be
// thread-safe; scripted ones must be pure in (problem, n, seed).
class Proposer {
 public:
  virtual ~Proposer() = default;
  virtual std::vector<ReasoningTrace> propose(const Problem& problem, int n, uint64_t seed) = 0;
};

// Synthetic-family proposer: each candidate is independently correct with
// probability p; a wrong candidate perturbs its final step by a delta unique
// to the candidate's position, so wrong answers never collide in a vote.
class ScriptedProposer : public Proposer {
 public:
  explicit ScriptedProposer(double correct_probability);
  std::vector<ReasoningTrace> propose(const Problem& problem, int n, uint64_t seed) override;

 private:
  double p_;
};

// Live proposer: asks the backend to solve the problem step by step and
// parses one step per line plus a final "Answer:" line. Candidates whose
// samples fail transport are dropped; all-failed raises transport_error.
class BackendProposer : public Proposer {
 public:
  BackendProposer(std::shared_ptr<Backend> backend, double temperature = 0.7);
  std::vector<ReasoningTrace> propose(const Problem& problem, int n, uint64_t seed) override;

 private:
  std::shared_ptr<Backend> backend_;
  double temperature_;
};

// Solve-prompt plumbing shared with the live rollout completer.
std::vector<ChatMessage> build_solve_prompt(const Problem& problem,
                                            const std::vector<Step>& prefix);
struct ParsedSolution {
  std::vector<std::string> steps;  // includes the final "Answer: ..." line
};
ParsedSolution parse_solution_text(const std::string& text);

// ============================================================================
// Selection rules
// ============================================================================

// Most frequent normalized answer; ties break to the answer whose first
// occurrence comes earliest.
std::string majority_vote(const std::vector<Candidate>& candidates);

struct VerifiedBestOutcome {
  size_t chosen_index = 0;
  std::string answer;        // normalized
  bool by_fallback = false;  // no candidate passed; majority vote used
  // One slot per candidate verified before stopping; nullopt marks a
  // verification that errored (counted as not-all-correct).
  std::vector<std::optional<verifier::VerificationResult>> verifications;
};

// Verifies candidates in order and picks the first classified all-correct;
// when none passes, falls back to the majority answer (reported with the
// index of its first supporter).
VerifiedBestOutcome verified_best(const std::vector<Candidate>& candidates,
                                  const verifier::VerifierConfig& config);

// ============================================================================
// Best-of-N
// ============================================================================

struct BestOfNOutcome {
  int n = 0;
  std::string maj_answer;  // normalized
  std::string rm_answer;   // normalized
  bool maj_correct = false;
  bool rm_correct = false;
  std::vector<Candidate> candidates;
};

// Samples n candidates, applies both selection rules, and scores them against
// the problem's gold answer (required). Proposer and verifier seeds derive
// from `seed`.
BestOfNOutcome best_of_n(const Problem& problem, Proposer& proposer,
                         const verifier::VerifierConfig& verifier_config, int n, uint64_t seed);

}  // namespace dyve::selection
