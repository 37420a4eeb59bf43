#include "dyve/supervision.hpp"

#include <algorithm>
#include <cctype>

#include "dyve/rng.hpp"
#include "dyve/verifier.hpp"
#include "dyve/worker_pool.hpp"

namespace dyve::supervision {

const char* filter_reason_name(FilterReason reason) {
  switch (reason) {
    case FilterReason::Agree: return "agree";
    case FilterReason::Disagree: return "disagree";
    case FilterReason::JudgeError: return "judge_error";
  }
  throw contract_error("unknown filter reason");
}

FilterOutcome consensus_filter(const std::vector<CuratedRollout>& rollouts, Judge& judge,
                               int workers) {
  if (rollouts.empty()) throw contract_error("consensus_filter: no rollouts given");

  struct Row {
    FilterDecision decision;
    JudgedLabel judged;
  };
  const auto rows = parallel_map(rollouts, workers, [&](const CuratedRollout& rollout, size_t) {
    Row row;
    row.decision.id = rollout.id;
    row.judged.rollout = rollout;
    try {
      const JudgeDecision decision = judge.judge(rollout.trace.problem, rollout.trace,
                                                 rollout.label);
      row.judged.judge_agrees = decision.agrees;
      row.judged.judge_rationale = decision.rationale;
      row.decision.kept = decision.agrees;
      row.decision.reason = decision.agrees ? FilterReason::Agree : FilterReason::Disagree;
    } catch (const transport_error& e) {
      // A broken judge may only drop data, never admit it; tallied apart from
      // genuine disagreements.
      row.judged.judge_agrees = false;
      row.judged.judge_rationale = e.what();
      row.decision.kept = false;
      row.decision.reason = FilterReason::JudgeError;
    }
    return row;
  });

  FilterOutcome outcome;
  outcome.report.reserve(rows.size());
  for (const Row& row : rows) {
    outcome.report.push_back(row.decision);
    if (row.decision.kept) outcome.kept.push_back(row.judged);
  }
  return outcome;
}

std::vector<StepExample> step_examples(const std::vector<JudgedLabel>& kept) {
  std::vector<StepExample> examples;
  for (const JudgedLabel& judged : kept) {
    const CuratedRollout& rollout = judged.rollout;
    const int total = rollout.trace.step_count();
    const int prefix = rollout.label.is_all_correct() ? total : rollout.label.value + 1;
    for (int t = 0; t < prefix; ++t) {
      examples.push_back(StepExample{rollout.id, t, t != rollout.label.value});
    }
  }
  return examples;
}

std::vector<StepExample> rebalance(const std::vector<StepExample>& examples, uint64_t seed) {
  size_t positives = 0;
  for (const StepExample& example : examples) positives += example.positive ? 1 : 0;
  const size_t negatives = examples.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw domain_error("rebalance: need both positive and negative step labels (have " +
                       std::to_string(positives) + " positive, " + std::to_string(negatives) +
                       " negative)");
  }

  const bool downsample_positive = positives > negatives;
  const size_t majority = std::max(positives, negatives);
  const size_t minority = std::min(positives, negatives);
  if (majority == minority) return examples;

  // Choose `minority` survivors from the majority class by a partial
  // Fisher-Yates over its index list, then restore input order.
  std::vector<size_t> majority_indices;
  majority_indices.reserve(majority);
  for (size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].positive == downsample_positive) majority_indices.push_back(i);
  }
  rng::SplitMix64 rng(rng::derive_seed(seed, 0xba1aULL));
  for (size_t k = 0; k < minority; ++k) {
    const size_t j = k + static_cast<size_t>(rng.next_below(majority_indices.size() - k));
    std::swap(majority_indices[k], majority_indices[j]);
  }
  std::vector<bool> keep_majority(examples.size(), false);
  for (size_t k = 0; k < minority; ++k) keep_majority[majority_indices[k]] = true;

  std::vector<StepExample> balanced;
  balanced.reserve(2 * minority);
  for (size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].positive != downsample_positive || keep_majority[i]) {
      balanced.push_back(examples[i]);
    }
  }
  return balanced;
}

namespace {

std::string trim(const std::string& text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

bool is_confident_affirmation(const std::string& response) {
  const std::string body = trim(verifier::strip_think_blocks(response));
  if (body == "+") return true;
  std::string token = body.substr(0, body.find_first_of(" \t\n"));
  while (!token.empty() && std::ispunct(static_cast<unsigned char>(token.back()))) {
    token.pop_back();
  }
  token = lowercase(token);
  return token == "+" || token == "correct" || token == "yes";
}

std::vector<StepFlag> flag_steps(const JudgedLabel& judged, Backend& reasoner, int max_tokens) {
  const CuratedRollout& rollout = judged.rollout;
  const int total = rollout.trace.step_count();
  if (total == 0) throw domain_error("flag_steps: rollout has no steps");
  const int prefix = rollout.label.is_all_correct() ? total : rollout.label.value + 1;

  std::vector<StepFlag> flags;
  flags.reserve(static_cast<size_t>(prefix));
  std::vector<std::string> history;
  history.reserve(static_cast<size_t>(prefix));
  for (int t = 1; t <= prefix; ++t) {
    CompletionRequest request;
    request.messages =
        verifier::build_step_prompt(rollout.trace.problem, rollout.trace.steps, t, history);
    request.max_tokens = max_tokens;
    request.temperature = 0.0;
    const std::string response = reasoner.complete(request).at(0);
    history.push_back(response);

    StepFlag flag;
    flag.step_index = t - 1;
    const bool erroneous = (flag.step_index == rollout.label.value);
    if (!erroneous && is_confident_affirmation(response)) {
      flag.mode = StepMode::Fast;
    } else {
      // Hedged, negative, unparseable, or the error step itself: keep the
      // reasoner's analysis for the think block, falling back to its raw
      // reply when no usable analysis came back.
      flag.mode = StepMode::Deep;
      const auto body = verifier::first_think_body(response);
      std::string rationale = body ? trim(*body) : std::string();
      if (rationale.empty()) rationale = trim(response);
      if (rationale.empty()) rationale = "no analysis provided";
      flag.deep_rationale = std::move(rationale);
    }
    flags.push_back(std::move(flag));
  }
  return flags;
}

std::string render_assistant_turn(const StepFlag& flag, bool erroneous) {
  if (flag.mode == StepMode::Fast) {
    if (erroneous) throw contract_error("render_assistant_turn: error steps cannot be Fast");
    return kFastReply;
  }
  if (flag.deep_rationale.empty()) {
    throw contract_error("render_assistant_turn: Deep flag without rationale");
  }
  return "<think>\n" + flag.deep_rationale + "\n</think>\nAnswer: " + (erroneous ? "-" : "+");
}

int emit_sft_records(const std::vector<StepFlag>& flags, const CuratedRollout& rollout,
                     const std::function<void(const SftRecord&)>& sink,
                     const std::unordered_set<int>* selected) {
  // All targets first: record t embeds the targets of steps 1..t-1 as its
  // conversation history, whether or not those records are themselves kept.
  std::vector<std::string> targets;
  targets.reserve(flags.size());
  for (const StepFlag& flag : flags) {
    const bool erroneous = (flag.step_index == rollout.label.value);
    targets.push_back(render_assistant_turn(flag, erroneous));
  }

  int written = 0;
  for (size_t i = 0; i < flags.size(); ++i) {
    const StepFlag& flag = flags[i];
    if (selected && !selected->count(flag.step_index)) continue;
    SftRecord record;
    record.turns = verifier::build_step_prompt(rollout.trace.problem, rollout.trace.steps,
                                               flag.step_index + 1, targets);
    record.turns.push_back(ChatMessage{Role::Assistant, targets[i]});
    try {
      sink(record);
    } catch (const io_error& e) {
      throw io_error(std::string(e.what()) + " (after writing " + std::to_string(written) +
                     " of " + std::to_string(flags.size()) + " records for '" + rollout.id +
                     "')");
    }
    ++written;
  }
  return written;
}

}  // namespace dyve::supervision
