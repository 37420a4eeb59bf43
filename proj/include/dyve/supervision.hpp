#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

#include "dyve/backend.hpp"
#include "dyve/core.hpp"

namespace dyve::supervision {

// A rollout label as it enters curation: the record id from disk plus the
// reconstructed trace and its proposed first-error annotation.
struct CuratedRollout {
  std::string id;
  ReasoningTrace trace;
  FirstErrorLabel label;
};

// ============================================================================
// Consensus filtering
// ============================================================================

struct JudgedLabel {
  CuratedRollout rollout;
  bool judge_agrees = false;
  std::string judge_rationale;
};

enum class FilterReason { Agree, Disagree, JudgeError };

const char* filter_reason_name(FilterReason reason);

struct FilterDecision {
  std::string id;
  bool kept = false;
  FilterReason reason = FilterReason::Disagree;
};

struct FilterOutcome {
  std::vector<JudgedLabel> kept;        // agreements only, input order
  std::vector<FilterDecision> report;   // one decision per input, input order
};

// Asks the judge about every rollout's annotation (fanned out over `workers`
// threads) and keeps exactly the agreements. A judge transport failure drops
// that rollout with reason JudgeError instead of failing the batch.
FilterOutcome consensus_filter(const std::vector<CuratedRollout>& rollouts, Judge& judge,
                               int workers);

// ============================================================================
// Step-label rebalancing
// ============================================================================

// One step-level verdict contributed by a kept rollout: its correct prefix
// steps are positive examples, its first-error step (when present) the single
// negative one.
struct StepExample {
  std::string rollout_id;
  int step_index = 0;  // 0-based position within the rollout's trace
  bool positive = true;
};

// Expands kept rollouts into step examples, in rollout order then step order.
std::vector<StepExample> step_examples(const std::vector<JudgedLabel>& kept);

// Downsamples the majority class uniformly at random (seeded) to the minority
// count; survivors keep their input order. Throws domain_error when only one
// class is present.
std::vector<StepExample> rebalance(const std::vector<StepExample>& examples, uint64_t seed);

// ============================================================================
// Step flagging
// ============================================================================

enum class StepMode { Fast, Deep };

struct StepFlag {
  int step_index = 0;  // 0-based
  StepMode mode = StepMode::Deep;
  std::string deep_rationale;  // non-empty exactly when mode == Deep
};

// True when a reasoner response amounts to a bare confident confirmation:
// the visible body (think blocks removed) is "+" or starts with an
// affirmation token ("correct", "yes", case-insensitive).
bool is_confident_affirmation(const std::string& response);

// Runs the reasoner over each step of the rollout's verified prefix (all
// steps up to and including the first error) as one growing conversation.
// Confidently affirmed steps become Fast; everything else becomes Deep and
// keeps the reasoner's analysis (or its raw reply when no think block is
// present). The first-error step is always Deep.
std::vector<StepFlag> flag_steps(const JudgedLabel& judged, Backend& reasoner,
                                 int max_tokens = kMaxResponseTokens);

// ============================================================================
// SFT record emission
// ============================================================================

struct SftRecord {
  std::vector<ChatMessage> turns;
};

// Renders the assistant turn a flag encodes: Fast is exactly the empty think
// block plus "+"; Deep wraps the rationale in a think block followed by
// "Answer: +" or "Answer: -" depending on whether the step is the rollout's
// first error.
std::string render_assistant_turn(const StepFlag& flag, bool erroneous);

// Emits one conversation per flag (optionally restricted to `selected` step
// indices, the rebalance survivors): user turns rebuild the step-by-step
// exchange with earlier targets as history, the final assistant turn is the
// flag's target. Returns the number of records handed to the sink.
int emit_sft_records(const std::vector<StepFlag>& flags, const CuratedRollout& rollout,
                     const std::function<void(const SftRecord&)>& sink,
                     const std::unordered_set<int>* selected = nullptr);

}  // namespace dyve::supervision
