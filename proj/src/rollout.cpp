#include "dyve/rollout.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "dyve/rng.hpp"
#include "dyve/selection.hpp"

namespace dyve::rollout {

void TreeConfig::validate() const {
  if (c_puct <= 0.0) throw contract_error("tree config: c_puct must be positive");
  if (mc_samples < 1) throw contract_error("tree config: mc_samples must be >= 1");
  if (rollouts_per_query < 1) {
    throw contract_error("tree config: rollouts_per_query must be >= 1");
  }
  if (search_limit < 1) throw contract_error("tree config: search_limit must be >= 1");
  if (alpha <= 0.0 || alpha > 1.0) throw contract_error("tree config: alpha must be in (0, 1]");
  if (beta <= 0.0 || beta > 1.0) throw contract_error("tree config: beta must be in (0, 1]");
  if (length_scale <= 0.0) throw contract_error("tree config: length_scale must be positive");
}

double puct_score(int visit_count, int sibling_visit_sum, double c_puct) {
  if (visit_count < 0 || sibling_visit_sum < 0) {
    throw contract_error("puct_score: visit counts must be non-negative");
  }
  return c_puct * std::sqrt(static_cast<double>(sibling_visit_sum)) /
         (1.0 + static_cast<double>(visit_count));
}

double q_value(double mc, int rollout_length, const TreeConfig& config) {
  if (mc < 0.0 || mc > 1.0) throw contract_error("q_value: mc must be in [0, 1]");
  if (rollout_length < 0) throw contract_error("q_value: rollout_length must be >= 0");
  return std::pow(config.alpha, 1.0 - mc) *
         std::pow(config.beta, static_cast<double>(rollout_length) / config.length_scale);
}

int completion_length(const Completion& completion) {
  int words = 0;
  for (const Step& step : completion.steps) {
    bool in_word = false;
    for (char c : step.text) {
      const bool space = (c == ' ' || c == '\t' || c == '\n');
      if (!space && !in_word) ++words;
      in_word = !space;
    }
  }
  return words;
}

size_t argmax_selection(const std::vector<double>& q, const std::vector<double>& u) {
  if (q.empty() || q.size() != u.size()) {
    throw contract_error("argmax_selection: score vectors empty or mismatched");
  }
  size_t best = 0;
  double best_score = q[0] + u[0];
  for (size_t i = 1; i < q.size(); ++i) {
    const double score = q[i] + u[i];
    if (score > best_score) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

size_t select_rollout(const std::vector<PoolCandidate>& pool, const TreeConfig& config) {
  if (pool.empty()) throw contract_error("select_rollout: pool is empty");
  int sibling_sum = 0;
  for (const PoolCandidate& candidate : pool) sibling_sum += candidate.visit_count;
  std::vector<double> q, u;
  q.reserve(pool.size());
  u.reserve(pool.size());
  for (const PoolCandidate& candidate : pool) {
    q.push_back(q_value(candidate.mc, candidate.rollout_length, config));
    u.push_back(puct_score(candidate.visit_count, sibling_sum, config.c_puct));
  }
  return argmax_selection(q, u);
}

// ============================================================================
// Monte Carlo estimation
// ============================================================================

std::vector<Completion> sample_completions(const ReasoningTrace& prefix, Completer& completer,
                                           int n, uint64_t seed) {
  if (prefix.problem.statement.empty()) {
    throw contract_error("mc estimation: prefix carries an empty problem");
  }
  if (n < 1) throw contract_error("mc estimation: sample count must be >= 1");
  std::vector<Completion> samples;
  samples.reserve(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    try {
      samples.push_back(completer.complete(prefix, rng::mix(seed, static_cast<uint64_t>(k))));
    } catch (const transport_error& e) {
      throw transport_error(std::string(e.what()) + " (completing a " +
                            std::to_string(prefix.step_count()) + "-step prefix of '" +
                            prefix.problem.id + "')");
    }
  }
  return samples;
}

double estimate_mc(const ReasoningTrace& prefix, Completer& completer, int n, uint64_t seed) {
  const auto samples = sample_completions(prefix, completer, n, seed);
  int correct = 0;
  for (const Completion& completion : samples) correct += completion.is_correct ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

// ============================================================================
// Binary search
// ============================================================================

BinarySearchResult binary_search_first_error(
    int step_count, const std::function<double(int)>& mc_of_prefix_len) {
  if (step_count < 1) throw contract_error("binary search: trace must have at least one step");
  BinarySearchResult result;
  auto probe = [&](int len) {
    const double mc = mc_of_prefix_len(len);
    if (mc < 0.0 || mc > 1.0) throw contract_error("binary search: estimator left [0, 1]");
    result.probes.emplace_back(len, mc);
    return mc;
  };

  if (probe(step_count) > 0.0) {
    result.label = FirstErrorLabel::all_correct();
    return result;
  }
  // Invariant: MC(prefix of lo) > 0 (lo = 0 is the unprobed root, assumed
  // correct), MC(prefix of hi) = 0. Shrink to adjacent.
  int lo = 0;
  int hi = step_count;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (probe(mid) == 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  result.label = FirstErrorLabel::at(hi - 1);
  return result;
}

// ============================================================================
// State tree
// ============================================================================

StateTree::StateTree(Problem problem, Completer& completer, TreeConfig config, uint64_t seed)
    : problem_(std::move(problem)),
      root_{problem_, {}},
      completer_(&completer),
      config_(config),
      seed_(seed) {
  config_.validate();
}

uint64_t StateTree::key_of(const ReasoningTrace& prefix) const {
  // Content identity: the problem plus every step text. Probe seeds derive
  // from this key, which makes estimates a function of what is being probed
  // rather than of when — the property that keeps artifacts byte-identical
  // across worker counts and resume boundaries.
  uint64_t h = rng::fnv1a(prefix.problem.id);
  for (const Step& step : prefix.steps) {
    h = rng::fnv1a("\x1f", h);
    h = rng::fnv1a(step.text, h);
  }
  return h;
}

double StateTree::probe_impl(const ReasoningTrace& prefix, std::vector<Completion>* samples_out,
                             bool pool_samples) {
  const uint64_t key = key_of(prefix);
  if (auto it = nodes_.find(key); it != nodes_.end() && it->second.estimated) {
    if (samples_out) {
      *samples_out =
          sample_completions(prefix, *completer_, config_.mc_samples,
                             rng::derive_seed(seed_, key));
    }
    return it->second.mc;
  }

  auto samples = sample_completions(prefix, *completer_, config_.mc_samples,
                                    rng::derive_seed(seed_, key));
  int correct = 0;
  for (const Completion& completion : samples) correct += completion.is_correct ? 1 : 0;
  const double mc = static_cast<double>(correct) / static_cast<double>(samples.size());
  ++estimator_calls_;

  Node& node = nodes_[key];
  node.state = prefix;
  node.mc = mc;
  node.estimated = true;

  if (pool_samples && mc > 0.0 && mc < 1.0) {
    for (Completion& completion : samples) {
      if (!completion.is_correct && !completion.steps.empty()) {
        pool_.push_back(PoolEntry{key, completion});
      }
    }
  }
  if (samples_out) *samples_out = std::move(samples);
  return mc;
}

double StateTree::probe_mc(const ReasoningTrace& prefix) {
  return probe_impl(prefix, nullptr, /*pool_samples=*/true);
}

std::vector<Completion> StateTree::bootstrap_root() {
  std::vector<Completion> samples;
  probe_impl(root_, &samples, /*pool_samples=*/false);
  return samples;
}

RolloutLabel StateTree::label_rollout(const ReasoningTrace& trace) {
  if (trace.step_count() == 0) {
    throw contract_error("label_rollout: trace has no steps");
  }
  const int calls_before = estimator_calls_;
  const auto search = binary_search_first_error(
      trace.step_count(), [&](int len) { return probe_mc(trace_prefix(trace, len)); });

  RolloutLabel label;
  label.trace = trace;
  label.label = search.label;
  for (const auto& [len, mc] : search.probes) label.mc_at_prefixes[len] = mc;
  label.estimator_calls = estimator_calls_ - calls_before;
  return label;
}

ReasoningTrace StateTree::pop_selected() {
  if (pool_.empty()) throw contract_error("pop_selected: pool is empty");
  std::vector<PoolCandidate> candidates;
  candidates.reserve(pool_.size());
  for (const PoolEntry& entry : pool_) {
    const Node& node = nodes_.at(entry.node_key);
    candidates.push_back(
        PoolCandidate{node.mc, node.visit_count, completion_length(entry.rollout)});
  }
  const size_t chosen = select_rollout(candidates, config_);

  PoolEntry entry = std::move(pool_[chosen]);
  pool_.erase(pool_.begin() + static_cast<std::ptrdiff_t>(chosen));
  Node& node = nodes_.at(entry.node_key);
  ++node.visit_count;

  ReasoningTrace trace = node.state;
  for (Step& step : entry.rollout.steps) trace.steps.push_back(std::move(step));
  return trace;
}

std::vector<StateTree::PoolEntryView> StateTree::pool_view() const {
  std::vector<PoolEntryView> view;
  view.reserve(pool_.size());
  for (const PoolEntry& entry : pool_) {
    const Node& node = nodes_.at(entry.node_key);
    view.push_back(PoolEntryView{node.state.step_count(), node.mc, node.visit_count,
                                 completion_length(entry.rollout)});
  }
  return view;
}

std::optional<double> StateTree::mc_of(const ReasoningTrace& prefix) const {
  const auto it = nodes_.find(key_of(prefix));
  if (it == nodes_.end() || !it->second.estimated) return std::nullopt;
  return it->second.mc;
}

int StateTree::visits_of(const ReasoningTrace& prefix) const {
  const auto it = nodes_.find(key_of(prefix));
  return it == nodes_.end() ? 0 : it->second.visit_count;
}

// ============================================================================
// Driver
// ============================================================================

std::vector<RolloutLabel> generate_rollouts(const Problem& problem, Completer& completer,
                                            const TreeConfig& config, uint64_t seed) {
  config.validate();
  StateTree tree(problem, completer, config, seed);

  std::vector<RolloutLabel> labels;
  labels.reserve(static_cast<size_t>(config.rollouts_per_query));

  // Seed rollouts: the completions behind MC(root) are labeled directly.
  const auto bootstrap = tree.bootstrap_root();
  for (const Completion& completion : bootstrap) {
    if (static_cast<int>(labels.size()) >= config.rollouts_per_query) break;
    if (completion.steps.empty()) continue;
    ReasoningTrace trace = tree.root();
    trace.steps = completion.steps;
    labels.push_back(tree.label_rollout(trace));
  }

  // Tree search: pick by Q + U, locate the error, maintain statistics. Stops
  // at the quota, at the iteration cap, or when no rollout is left to pick.
  int iterations = 0;
  while (static_cast<int>(labels.size()) < config.rollouts_per_query && !tree.pool_empty() &&
         iterations < config.search_limit) {
    ++iterations;
    labels.push_back(tree.label_rollout(tree.pop_selected()));
  }
  return labels;
}

BackendCompleter::BackendCompleter(std::shared_ptr<Backend> backend, double temperature,
                                   int max_tokens)
    : backend_(std::move(backend)), temperature_(temperature), max_tokens_(max_tokens) {
  if (!backend_) {
    throw contract_error("backend completer requires a backend");
  }
}

Completion BackendCompleter::complete(const ReasoningTrace& prefix, uint64_t sample_seed) {
  count_sample();
  if (!prefix.problem.gold_answer) {
    throw domain_error("backend completer requires a gold answer to grade samples");
  }
  CompletionRequest request;
  request.messages = selection::build_solve_prompt(prefix.problem, prefix.steps);
  request.max_tokens = max_tokens_;
  request.temperature = temperature_;
  request.n = 1;
  request.seed = sample_seed;
  const auto replies = backend_->complete(request);

  Completion completion;
  const auto parsed = selection::parse_solution_text(replies.at(0));
  const int base = prefix.step_count();
  completion.steps.reserve(parsed.steps.size());
  for (size_t i = 0; i < parsed.steps.size(); ++i) {
    completion.steps.push_back(Step{base + static_cast<int>(i) + 1, parsed.steps[i]});
  }
  if (!completion.steps.empty()) {
    ReasoningTrace full = prefix;
    full.steps.insert(full.steps.end(), completion.steps.begin(), completion.steps.end());
    completion.final_answer = selection::extract_final_answer(full);
    completion.is_correct = selection::normalize_answer(completion.final_answer) ==
                            selection::normalize_answer(*prefix.problem.gold_answer);
  }
  return completion;
}

}  // namespace dyve::rollout
