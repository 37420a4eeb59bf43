#include "dyve/selection.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "dyve/rng.hpp"
#include "dyve/synth.hpp"

namespace dyve::selection {

namespace {

std::string trim(const std::string& text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

// One simplification pass; normalize_answer iterates it to a fixpoint.
std::string normalize_once(const std::string& raw) {
  std::string s = trim(raw);

  // Unwrap an enclosing \boxed{...} when its braces span the whole string.
  if (s.rfind("\\boxed{", 0) == 0 && s.size() >= 8 && s.back() == '}') {
    int depth = 1;  // the '{' at index 6
    bool spans = false;
    for (size_t i = 7; i < s.size(); ++i) {
      if (s[i] == '{') ++depth;
      if (s[i] == '}' && --depth == 0) {
        spans = (i == s.size() - 1);
        break;
      }
    }
    if (spans) s = s.substr(7, s.size() - 8);
  }

  // Collapse whitespace runs and lowercase purely alphabetic tokens.
  std::istringstream in(s);
  std::string token, out;
  while (in >> token) {
    const bool alphabetic = std::all_of(token.begin(), token.end(), [](unsigned char c) {
      return std::isalpha(c) != 0;
    });
    if (alphabetic) {
      std::transform(token.begin(), token.end(), token.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    }
    if (!out.empty()) out += ' ';
    out += token;
  }
  return out;
}

}  // namespace

std::string normalize_answer(const std::string& raw) {
  std::string current = raw;
  for (int i = 0; i < 8; ++i) {
    std::string next = normalize_once(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

std::string extract_final_answer(const ReasoningTrace& trace) {
  if (trace.steps.empty()) throw contract_error("extract_final_answer: trace has no steps");
  const std::string& text = trace.steps.back().text;

  const size_t boxed = text.rfind("\\boxed{");
  if (boxed != std::string::npos) {
    int depth = 0;
    for (size_t i = boxed + 6; i < text.size(); ++i) {
      if (text[i] == '{') ++depth;
      if (text[i] == '}' && --depth == 0) {
        return trim(text.substr(boxed + 7, i - boxed - 7));
      }
    }
  }
  const size_t answer = text.rfind("Answer:");
  if (answer != std::string::npos) return trim(text.substr(answer + 7));
  const size_t equals = text.rfind('=');
  if (equals != std::string::npos) return trim(text.substr(equals + 1));
  return trim(text);
}

// ============================================================================
// Proposers
// ============================================================================

ScriptedProposer::ScriptedProposer(double correct_probability) : p_(correct_probability) {
  if (p_ < 0.0 || p_ > 1.0) {
    throw contract_error("scripted proposer: probability must be in [0, 1]");
  }
}

std::vector<ReasoningTrace> ScriptedProposer::propose(const Problem& problem, int n,
                                                      uint64_t seed) {
  if (n < 1) throw contract_error("propose: n must be >= 1");
  const auto spec = synth::spec_from_id(problem.id);
  if (!spec) {
    throw domain_error("scripted proposer: problem id '" + problem.id +
                       "' does not name a synthetic task");
  }
  const synth::ChainSchedule schedule = synth::make_schedule(*spec);

  std::vector<ReasoningTrace> candidates;
  candidates.reserve(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    rng::SplitMix64 rng(rng::mix(seed, static_cast<uint64_t>(k)));
    const bool correct = rng.next_bernoulli(p_);

    std::vector<std::string> texts;
    texts.reserve(schedule.ops.size());
    long long running = schedule.start;
    for (size_t t = 0; t < schedule.ops.size(); ++t) {
      const synth::ChainOp& op = schedule.ops[t];
      long long stated = op.apply(running);
      // A wrong candidate errs exactly on the last step, by a delta unique to
      // the candidate position so that wrong answers never agree in a vote.
      if (!correct && t + 1 == schedule.ops.size()) stated += k + 1;
      texts.push_back(synth::render_step(running, op, stated));
      running = stated;
    }
    candidates.push_back(make_trace(problem, texts));
  }
  return candidates;
}

std::vector<ChatMessage> build_solve_prompt(const Problem& problem,
                                            const std::vector<Step>& prefix) {
  std::ostringstream user;
  user << problem.statement
       << "\n\nSolve the problem step by step, one step per line. End with a final line of "
          "the form 'Answer: <value>'.";
  if (!prefix.empty()) {
    user << "\n\nPartial solution:\n";
    for (const Step& step : prefix) {
      user << "Step " << step.index << ": " << step.text << "\n";
    }
    user << "\nContinue from step " << (prefix.back().index + 1) << ".";
  }
  return {ChatMessage{Role::User, user.str()}};
}

ParsedSolution parse_solution_text(const std::string& text) {
  ParsedSolution parsed;
  std::istringstream in(verifier::strip_think_blocks(text));
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    // Strip a leading "Step <k>:" marker when the model numbers its steps.
    if (line.rfind("Step ", 0) == 0) {
      size_t i = 5;
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      if (i > 5 && i < line.size() && (line[i] == ':' || line[i] == '.')) {
        line = trim(line.substr(i + 1));
        if (line.empty()) continue;
      }
    }
    parsed.steps.push_back(line);
    // Everything after the answer line is ignored.
    if (line.rfind("Answer:", 0) == 0) break;
  }
  return parsed;
}

BackendProposer::BackendProposer(std::shared_ptr<Backend> backend, double temperature)
    : backend_(std::move(backend)), temperature_(temperature) {}

std::vector<ReasoningTrace> BackendProposer::propose(const Problem& problem, int n,
                                                     uint64_t seed) {
  if (n < 1) throw contract_error("propose: n must be >= 1");
  std::vector<ReasoningTrace> candidates;
  std::string last_error;
  for (int k = 0; k < n; ++k) {
    CompletionRequest request;
    request.messages = build_solve_prompt(problem, {});
    request.temperature = temperature_;
    request.seed = rng::mix(seed, static_cast<uint64_t>(k));
    std::string response;
    try {
      response = backend_->complete(request).at(0);
    } catch (const transport_error& e) {
      last_error = e.what();
      continue;  // lose the sample, not the batch
    }
    const ParsedSolution parsed = parse_solution_text(response);
    if (parsed.steps.empty()) continue;
    candidates.push_back(make_trace(problem, parsed.steps));
  }
  if (candidates.empty()) {
    throw transport_error("proposer: all " + std::to_string(n) + " samples failed for '" +
                          problem.id + "' — last error: " + last_error);
  }
  return candidates;
}

// ============================================================================
// Selection rules
// ============================================================================

std::string majority_vote(const std::vector<Candidate>& candidates) {
  if (candidates.empty()) throw contract_error("majority_vote: no candidates");
  std::map<std::string, int> counts;
  std::map<std::string, size_t> first_seen;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const std::string answer = normalize_answer(candidates[i].final_answer);
    ++counts[answer];
    first_seen.emplace(answer, i);
  }
  std::string best;
  int best_count = -1;
  size_t best_first = 0;
  for (const auto& [answer, count] : counts) {
    const size_t first = first_seen.at(answer);
    if (count > best_count || (count == best_count && first < best_first)) {
      best = answer;
      best_count = count;
      best_first = first;
    }
  }
  return best;
}

VerifiedBestOutcome verified_best(const std::vector<Candidate>& candidates,
                                  const verifier::VerifierConfig& config) {
  if (candidates.empty()) throw contract_error("verified_best: no candidates");
  VerifiedBestOutcome outcome;
  for (size_t i = 0; i < candidates.size(); ++i) {
    std::optional<verifier::VerificationResult> result;
    try {
      result = verifier::verify_trace(candidates[i].trace.problem, candidates[i].trace.steps,
                                      config);
    } catch (const std::runtime_error&) {
      // A failed verification cannot admit the candidate.
      result = std::nullopt;
    }
    const bool passed = result && result->classification.is_all_correct();
    outcome.verifications.push_back(std::move(result));
    if (passed) {
      outcome.chosen_index = i;
      outcome.answer = normalize_answer(candidates[i].final_answer);
      outcome.by_fallback = false;
      return outcome;
    }
  }

  outcome.by_fallback = true;
  outcome.answer = majority_vote(candidates);
  outcome.chosen_index = 0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (normalize_answer(candidates[i].final_answer) == outcome.answer) {
      outcome.chosen_index = i;
      break;
    }
  }
  return outcome;
}

BestOfNOutcome best_of_n(const Problem& problem, Proposer& proposer,
                         const verifier::VerifierConfig& verifier_config, int n, uint64_t seed) {
  if (n < 1) throw contract_error("best_of_n: n must be >= 1");
  if (!problem.gold_answer) {
    throw domain_error("best_of_n: problem '" + problem.id + "' has no gold answer to score by");
  }

  const auto traces = proposer.propose(problem, n, rng::derive_seed(seed, 0x9099ULL));
  BestOfNOutcome outcome;
  outcome.n = n;
  outcome.candidates.reserve(traces.size());
  for (const ReasoningTrace& trace : traces) {
    Candidate candidate;
    candidate.trace = trace;
    candidate.final_answer = extract_final_answer(trace);
    outcome.candidates.push_back(std::move(candidate));
  }

  outcome.maj_answer = majority_vote(outcome.candidates);
  auto verified = verified_best(outcome.candidates, verifier_config);
  outcome.rm_answer = verified.answer;
  for (size_t i = 0; i < verified.verifications.size(); ++i) {
    outcome.candidates[i].verification = std::move(verified.verifications[i]);
  }

  const std::string gold = normalize_answer(*problem.gold_answer);
  outcome.maj_correct = (outcome.maj_answer == gold);
  outcome.rm_correct = (outcome.rm_answer == gold);
  return outcome;
}

}  // namespace dyve::selection
