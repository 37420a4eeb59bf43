#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dyve/errors.hpp"

namespace dyve {

// ============================================================================
// Domain types shared by the whole pipeline
// ============================================================================

struct Problem {
  std::string id;
  std::string statement;
  std::optional<std::string> gold_answer;
};

// One reasoning step. Indices are 1-based inside traces.
struct Step {
  int index = 0;
  std::string text;
};

// A problem plus an ordered list of steps 1..T. Immutable value; operations
// return modified copies.
struct ReasoningTrace {
  Problem problem;
  std::vector<Step> steps;

  int step_count() const { return static_cast<int>(steps.size()); }
};

// 0-based index of the earliest erroneous step, or -1 meaning all steps are
// correct. This is the convention used by the on-disk dataset format; step
// objects themselves stay 1-based.
struct FirstErrorLabel {
  int value = -1;

  static FirstErrorLabel all_correct() { return FirstErrorLabel{-1}; }
  static FirstErrorLabel at(int zero_based) { return FirstErrorLabel{zero_based}; }

  bool is_all_correct() const { return value == -1; }
  bool valid_for(int step_count) const { return value == -1 || (value >= 0 && value < step_count); }

  friend bool operator==(const FirstErrorLabel& a, const FirstErrorLabel& b) {
    return a.value == b.value;
  }
};

enum class VerdictKind { Correct, Incorrect, Unparseable };

// Outcome of parsing one verifier response. Unparseable keeps the raw text
// around for diagnostics.
struct Verdict {
  VerdictKind kind = VerdictKind::Unparseable;
  std::string raw;  // set for Unparseable only

  static Verdict correct() { return {VerdictKind::Correct, {}}; }
  static Verdict incorrect() { return {VerdictKind::Incorrect, {}}; }
  static Verdict unparseable(std::string text) { return {VerdictKind::Unparseable, std::move(text)}; }
};

// ============================================================================
// Pure trace helpers
// ============================================================================

// Validates that steps are indexed exactly 1..T.
bool trace_is_contiguous(const ReasoningTrace& trace);

// Appends one step to a copy of the prefix. The new step's index must be
// prefix.T + 1.
ReasoningTrace extend_state(const ReasoningTrace& prefix, Step action);

// First t steps of the trace as a new trace, 0 <= t <= T.
ReasoningTrace trace_prefix(const ReasoningTrace& trace, int t);

// Builds a trace from raw step texts, assigning indices 1..T.
ReasoningTrace make_trace(Problem problem, const std::vector<std::string>& step_texts);

}  // namespace dyve
