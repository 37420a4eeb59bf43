#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "dyve/backend.hpp"
#include "dyve/core.hpp"

namespace dyve::synth {

// ============================================================================
// Synthetic arithmetic-chain task family
// ============================================================================
//
// A task is an integer chain: a start value followed by chain_length add or
// multiply operations, each step stating its own result, e.g.
//
//   problem:  "Start with 7. Apply each operation in order and report the
//              final value."
//   step 1:   "7 + 3 = 10"
//   step 2:   "10 * 2 = 20"
//
// An injected error perturbs a stated result by a strictly positive delta;
// later steps keep computing correctly from the perturbed running value, so
// the final answer is wrong whenever any step is wrong. Deltas are positive
// and operations are monotone (adds, multiplies by >= 2 on positive values),
// so errors can never cancel: once a prefix contains an error, every
// continuation ends with a wrong final answer. That is the property the
// binary-search labeler relies on.

struct SynthTaskSpec {
  int chain_length = 8;    // >= 1
  double error_rate = 0.0; // per-step probability of injecting an error
  uint64_t seed = 0;

  void validate() const {
    if (chain_length < 1) throw contract_error("synth spec: chain_length must be >= 1");
    if (error_rate < 0.0 || error_rate > 1.0)
      throw contract_error("synth spec: error_rate must be in [0, 1]");
  }
};

enum class OpKind { Add, Mul };

struct ChainOp {
  OpKind kind;
  long long operand;

  long long apply(long long value) const {
    return kind == OpKind::Add ? value + operand : value * operand;
  }
};

// Derived deterministically from spec.seed: start value plus one operation per
// step. Multiplications are suppressed once the true running value gets large,
// keeping every chain inside int64 range.
struct ChainSchedule {
  long long start = 0;
  std::vector<ChainOp> ops;

  long long true_value_after(int steps) const;
  long long final_value() const { return true_value_after(static_cast<int>(ops.size())); }
};

ChainSchedule make_schedule(const SynthTaskSpec& spec);

// Task ids embed the full spec so any process can rebuild the task from a
// dataset row alone: "synth-<seed hex>-<chain_length>-<error permille>[-<tag>]".
std::string id_from_spec(const SynthTaskSpec& spec, const std::string& tag = "");
std::optional<SynthTaskSpec> spec_from_id(const std::string& id);

// Renders one step's text: "<prev> + <operand> = <stated>".
std::string render_step(long long prev, const ChainOp& op, long long stated);

// Generates the task: problem statement, a full solution trace with at most
// one injected error, and the ground-truth first-error label.
std::tuple<Problem, ReasoningTrace, FirstErrorLabel> synth_problem(const SynthTaskSpec& spec,
                                                                   const std::string& tag = "");

// Continues a (possibly corrupted) prefix of a synthetic trace to the end of
// its chain. Each generated step is independently erroneous with probability
// spec.error_rate under the given sampling seed. Throws domain_error when the
// prefix does not belong to the synthetic family.
Completion synth_complete(const ReasoningTrace& prefix, const SynthTaskSpec& spec,
                          uint64_t sample_seed);

// ============================================================================
// Local arithmetic oracle
// ============================================================================

struct ParsedStep {
  long long lhs = 0;
  OpKind kind = OpKind::Add;
  long long operand = 0;
  long long stated = 0;
};

// Parses "<a> +|* <b> = <c>"; rejects anything else.
std::optional<ParsedStep> parse_step_text(const std::string& text);

// Start value from a chain problem statement ("Start with N.").
std::optional<long long> parse_start_value(const std::string& statement);

// First locally inconsistent step of a chain trace (0-based), or -1. A step is
// consistent when its left operand equals the previous stated value and its
// stated result equals the computed one. Works on any trace in the chain text
// format, including completions with several injected errors.
std::optional<FirstErrorLabel> oracle_first_error(const ReasoningTrace& trace);

// ============================================================================
// Scripted implementations
// ============================================================================

// Deterministic chat backend over the synthetic family. Step-verification
// prompts are answered from the arithmetic oracle: a consistent step gets the
// fast form "<think>\n</think> +", an inconsistent one gets a short analysis
// block ending in "Answer: -". Anything it cannot read gets a fixed
// non-verdict reply. Responses are a pure function of (messages, seed).
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(double virtual_cost = 0.0) : virtual_cost_(virtual_cost) {}

  std::vector<std::string> complete(const CompletionRequest& request) override;
  std::optional<double> virtual_cost_per_call() const override { return virtual_cost_; }

 private:
  std::string respond(const CompletionRequest& request) const;
  double virtual_cost_;
};

// Judge that compares a proposed label against the arithmetic oracle's ground
// truth, flipping its verdict with probability flip_rate (seeded, per call
// identity). flip_rate 0.5 yields agreement rate 0.5 independent of truth.
class ScriptedJudge : public Judge {
 public:
  ScriptedJudge(double flip_rate, uint64_t seed) : flip_rate_(flip_rate), seed_(seed) {}

  JudgeDecision judge(const Problem& problem, const ReasoningTrace& trace,
                      FirstErrorLabel proposed) override;

 private:
  double flip_rate_;
  uint64_t seed_;
};

// Completer over the synthetic family: recovers the task from the problem id
// and continues the chain with synth_complete. An error_rate override, when
// set, replaces the rate encoded in the id (so estimation noise can differ
// from the noise the dataset was generated with).
class SynthCompleter : public Completer {
 public:
  explicit SynthCompleter(std::optional<double> error_rate = std::nullopt)
      : error_rate_(error_rate) {}

  Completion complete(const ReasoningTrace& prefix, uint64_t sample_seed) override;

 private:
  std::optional<double> error_rate_;
};

}  // namespace dyve::synth
