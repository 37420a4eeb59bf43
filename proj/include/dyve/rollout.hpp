#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dyve/backend.hpp"
#include "dyve/core.hpp"

namespace dyve::rollout {

// ============================================================================
// Configuration
// ============================================================================

struct TreeConfig {
  double c_puct = 1.25;        // exploration constant in U(s)
  int mc_samples = 16;         // completions per Monte Carlo estimate
  int rollouts_per_query = 20; // labels to produce per problem
  int search_limit = 200;      // max selection iterations per problem
  double alpha = 0.5;          // rollout value: alpha^(1-MC)
  double beta = 0.9;           // rollout value: beta^(len/length_scale)
  double length_scale = 500.0;

  void validate() const;
};

// ============================================================================
// Pure scoring helpers
// ============================================================================

// Exploration bonus U(s) = c_puct * sqrt(sibling_visit_sum) / (1 + visit_count).
double puct_score(int visit_count, int sibling_visit_sum, double c_puct);

// Rollout value Q(s,r) = alpha^(1-mc) * beta^(rollout_length/length_scale).
// Increasing in mc, decreasing in length: shorter rollouts hanging off
// higher-quality states are searched first.
double q_value(double mc, int rollout_length, const TreeConfig& config);

// Token-approximate length of a continuation (whitespace word count).
int completion_length(const Completion& completion);

// Index of the entry maximizing q[i] + u[i]; ties go to the lowest index.
// Shifting every q by a constant cannot change the winner.
size_t argmax_selection(const std::vector<double>& q, const std::vector<double>& u);

// One pool entry's selection inputs: the state's statistics plus the length
// of the continuation hanging off it.
struct PoolCandidate {
  double mc = 0.0;
  int visit_count = 0;
  int rollout_length = 0;
};

// argmax of Q(s,r) + U(s) over the pool (in insertion order); the sibling
// visit sum is taken over all pool entries.
size_t select_rollout(const std::vector<PoolCandidate>& pool, const TreeConfig& config);

// ============================================================================
// Monte Carlo estimation
// ============================================================================

// n completions of the prefix, sample k seeded by hash(seed, k).
std::vector<Completion> sample_completions(const ReasoningTrace& prefix, Completer& completer,
                                           int n, uint64_t seed);

// Fraction of n sampled completions that reach a correct final answer.
double estimate_mc(const ReasoningTrace& prefix, Completer& completer, int n, uint64_t seed);

// ============================================================================
// Binary search for the first error
// ============================================================================

struct BinarySearchResult {
  FirstErrorLabel label;
  // (prefix length, MC) for every probe this search made, in probe order; the
  // first entry is always the full-trace probe.
  std::vector<std::pair<int, double>> probes;
};

// Locates the smallest 0-based step index t with MC(prefix of length t+1) = 0,
// or all-correct when MC(full trace) > 0. Requires MC to be monotone-to-zero
// across the first error. Probes the full trace once, then bisects; at most
// ceil(log2(step_count)) + 1 probes total.
BinarySearchResult binary_search_first_error(
    int step_count, const std::function<double(int)>& mc_of_prefix_len);

// ============================================================================
// State-action tree
// ============================================================================

// One labeled rollout: the full trace, its first-error annotation, the MC
// values at every prefix its search probed, and the number of fresh Monte
// Carlo estimates the search cost.
struct RolloutLabel {
  ReasoningTrace trace;
  FirstErrorLabel label;
  std::map<int, double> mc_at_prefixes;
  int estimator_calls = 0;
};

// Per-problem search state: nodes keyed by prefix content carrying N(s) and
// MC(s), plus the selection pool of (state, continuation) pairs with
// 0 < MC(s) < 1. Owned by a single worker; not thread-safe by design.
class StateTree {
 public:
  StateTree(Problem problem, Completer& completer, TreeConfig config, uint64_t seed);

  const ReasoningTrace& root() const { return root_; }

  // MC(prefix), estimated once and cached. A fresh estimate registers the
  // node; when 0 < MC < 1 its incorrect sampled completions join the pool.
  double probe_mc(const ReasoningTrace& prefix);

  // Root estimate whose samples are returned for direct labeling instead of
  // entering the pool (their selection is forced, they are the seed rollouts).
  std::vector<Completion> bootstrap_root();

  // Labels one full rollout trace by binary search over its prefixes, feeding
  // the pool from every fresh probe along the way.
  RolloutLabel label_rollout(const ReasoningTrace& trace);

  // Applies the selection rule, increments N(s) on the chosen state, removes
  // the entry, and returns the full trace it denotes.
  ReasoningTrace pop_selected();

  bool pool_empty() const { return pool_.empty(); }
  size_t pool_size() const { return pool_.size(); }
  int estimator_calls() const { return estimator_calls_; }

  // Test hooks.
  struct PoolEntryView {
    int state_len = 0;
    double mc = 0.0;
    int visit_count = 0;
    int rollout_length = 0;
  };
  std::vector<PoolEntryView> pool_view() const;
  std::optional<double> mc_of(const ReasoningTrace& prefix) const;
  int visits_of(const ReasoningTrace& prefix) const;

 private:
  struct Node {
    ReasoningTrace state;
    int visit_count = 0;
    double mc = 0.0;
    bool estimated = false;
  };
  struct PoolEntry {
    uint64_t node_key = 0;
    Completion rollout;
  };

  uint64_t key_of(const ReasoningTrace& prefix) const;
  double probe_impl(const ReasoningTrace& prefix, std::vector<Completion>* samples_out,
                    bool pool_samples);

  Problem problem_;
  ReasoningTrace root_;
  Completer* completer_;
  TreeConfig config_;
  uint64_t seed_;
  std::unordered_map<uint64_t, Node> nodes_;
  std::vector<PoolEntry> pool_;  // insertion order == selection tie order
  int estimator_calls_ = 0;
};

// ============================================================================
// Driver
// ============================================================================

// The full per-query loop: bootstrap the root estimate, label the seed
// rollouts, then select → binary-search → maintain until the label quota,
// the search limit, or pool exhaustion ends the run.
std::vector<RolloutLabel> generate_rollouts(const Problem& problem, Completer& completer,
                                            const TreeConfig& config, uint64_t seed);

// ============================================================================
// Live completer
// ============================================================================

// Samples continuations from a chat backend and grades them against the
// problem's gold answer (required). One backend call per sample; the sample
// seed is forwarded so scripted backends stay deterministic.
class BackendCompleter : public Completer {
 public:
  BackendCompleter(std::shared_ptr<Backend> backend, double temperature = 0.7,
                   int max_tokens = kMaxResponseTokens);

  Completion complete(const ReasoningTrace& prefix, uint64_t sample_seed) override;

 private:
  std::shared_ptr<Backend> backend_;
  double temperature_;
  int max_tokens_;
};

}  // namespace dyve::rollout
