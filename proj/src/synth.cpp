#include "dyve/synth.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "dyve/rng.hpp"

namespace dyve::synth {

using rng::SplitMix64;

namespace {

// Sub-stream salts so the schedule, the injected errors, and completion
// sampling never share a random stream.
constexpr uint64_t kScheduleSalt = 0x5c4edu;
constexpr uint64_t kErrorSalt = 0xe44u;

// Multiplications stop once the true running value reaches this bound; with
// additions capped at 19 per step, chains stay far inside int64 range even
// after error deltas are amplified by later multiplications.
constexpr long long kMulCeiling = 1'000'000'000'000LL;

std::string to_hex(uint64_t v) {
  char buf[17];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, 16);
  return std::string(buf, ptr);
}

std::optional<long long> parse_ll(std::string_view text) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

ChainSchedule make_schedule(const SynthTaskSpec& spec) {
  spec.validate();
  SplitMix64 rng(rng::derive_seed(spec.seed, kScheduleSalt));
  ChainSchedule schedule;
  schedule.start = rng.next_in(2, 12);
  long long value = schedule.start;
  schedule.ops.reserve(static_cast<size_t>(spec.chain_length));
  for (int i = 0; i < spec.chain_length; ++i) {
    ChainOp op;
    if (value < kMulCeiling && rng.next_bernoulli(0.3)) {
      op.kind = OpKind::Mul;
      op.operand = rng.next_in(2, 3);
    } else {
      op.kind = OpKind::Add;
      op.operand = rng.next_in(2, 19);
    }
    schedule.ops.push_back(op);
    value = op.apply(value);
  }
  return schedule;
}

long long ChainSchedule::true_value_after(int steps) const {
  if (steps < 0 || steps > static_cast<int>(ops.size())) {
    throw contract_error("chain schedule: step count out of range");
  }
  long long value = start;
  for (int i = 0; i < steps; ++i) value = ops[static_cast<size_t>(i)].apply(value);
  return value;
}

std::string id_from_spec(const SynthTaskSpec& spec, const std::string& tag) {
  spec.validate();
  const auto permille = static_cast<long long>(spec.error_rate * 1000.0 + 0.5);
  std::string id = "synth-" + to_hex(spec.seed) + "-" + std::to_string(spec.chain_length) + "-" +
                   std::to_string(permille);
  if (!tag.empty()) id += "-" + tag;
  return id;
}

std::optional<SynthTaskSpec> spec_from_id(const std::string& id) {
  if (id.rfind("synth-", 0) != 0) return std::nullopt;
  // synth-<seed hex>-<chain_length>-<permille>[-<tag>]
  const std::string body = id.substr(6);
  const size_t d1 = body.find('-');
  if (d1 == std::string::npos) return std::nullopt;
  const size_t d2 = body.find('-', d1 + 1);
  if (d2 == std::string::npos) return std::nullopt;
  const size_t d3 = body.find('-', d2 + 1);  // start of optional tag

  uint64_t seed = 0;
  {
    const std::string_view hex = std::string_view(body).substr(0, d1);
    auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), seed, 16);
    if (ec != std::errc() || ptr != hex.data() + hex.size() || hex.empty()) return std::nullopt;
  }
  const auto length = parse_ll(std::string_view(body).substr(d1 + 1, d2 - d1 - 1));
  const size_t permille_end = (d3 == std::string::npos) ? body.size() : d3;
  const auto permille = parse_ll(std::string_view(body).substr(d2 + 1, permille_end - d2 - 1));
  if (!length || *length < 1 || !permille || *permille < 0 || *permille > 1000) {
    return std::nullopt;
  }

  SynthTaskSpec spec;
  spec.seed = seed;
  spec.chain_length = static_cast<int>(*length);
  spec.error_rate = static_cast<double>(*permille) / 1000.0;
  return spec;
}

std::string render_step(long long prev, const ChainOp& op, long long stated) {
  std::ostringstream out;
  out << prev << ' ' << (op.kind == OpKind::Add ? '+' : '*') << ' ' << op.operand << " = "
      << stated;
  return out.str();
}

std::tuple<Problem, ReasoningTrace, FirstErrorLabel> synth_problem(const SynthTaskSpec& spec,
                                                                   const std::string& tag) {
  const ChainSchedule schedule = make_schedule(spec);
  SplitMix64 rng(rng::derive_seed(spec.seed, kErrorSalt));

  Problem problem;
  problem.id = id_from_spec(spec, tag);
  problem.statement = "Start with " + std::to_string(schedule.start) +
                      ". Apply each operation in order and report the final value.";
  problem.gold_answer = std::to_string(schedule.final_value());

  std::vector<std::string> texts;
  texts.reserve(schedule.ops.size());
  long long running = schedule.start;
  int error_at = -1;
  for (size_t t = 0; t < schedule.ops.size(); ++t) {
    const ChainOp& op = schedule.ops[t];
    long long stated = op.apply(running);
    // At most one perturbation per problem; every later step continues the
    // chain correctly from the corrupted value, so the single error decides
    // the final answer.
    if (error_at < 0 && rng.next_bernoulli(spec.error_rate)) {
      error_at = static_cast<int>(t);
      stated += rng.next_in(1, 9);
    }
    texts.push_back(render_step(running, op, stated));
    running = stated;
  }

  ReasoningTrace trace = make_trace(problem, texts);
  const FirstErrorLabel label =
      error_at < 0 ? FirstErrorLabel::all_correct() : FirstErrorLabel::at(error_at);
  return {problem, trace, label};
}

Completion synth_complete(const ReasoningTrace& prefix, const SynthTaskSpec& spec,
                          uint64_t sample_seed) {
  const ChainSchedule schedule = make_schedule(spec);
  const int prefix_len = prefix.step_count();
  if (prefix_len > spec.chain_length) {
    throw domain_error("synth_complete: prefix longer than the task's chain");
  }
  if (!parse_start_value(prefix.problem.statement)) {
    throw domain_error("synth_complete: problem statement is not a chain task");
  }

  // The prefix must consist of chain steps following this schedule's operation
  // sequence; stated results may be corrupted, operations may not.
  long long running = schedule.start;
  for (int t = 0; t < prefix_len; ++t) {
    const auto parsed = parse_step_text(prefix.steps[static_cast<size_t>(t)].text);
    if (!parsed) throw domain_error("synth_complete: prefix step is not a chain step");
    const ChainOp& op = schedule.ops[static_cast<size_t>(t)];
    if (parsed->kind != op.kind || parsed->operand != op.operand) {
      throw domain_error("synth_complete: prefix does not follow this task's operations");
    }
    running = parsed->stated;
  }

  SplitMix64 rng(sample_seed);
  Completion completion;
  completion.steps.reserve(static_cast<size_t>(spec.chain_length - prefix_len));
  for (int t = prefix_len; t < spec.chain_length; ++t) {
    const ChainOp& op = schedule.ops[static_cast<size_t>(t)];
    long long stated = op.apply(running);
    // Unlike problem generation, completions may err on any number of steps;
    // deltas are strictly positive and operations are monotone, so no later
    // step can cancel an earlier delta.
    if (rng.next_bernoulli(spec.error_rate)) stated += rng.next_in(1, 9);
    Step step;
    step.index = t + 1;
    step.text = render_step(running, op, stated);
    completion.steps.push_back(std::move(step));
    running = stated;
  }
  completion.final_answer = std::to_string(running);
  completion.is_correct = (running == schedule.final_value());
  return completion;
}

// ============================================================================
// Local arithmetic oracle
// ============================================================================

std::optional<ParsedStep> parse_step_text(const std::string& text) {
  // "<a> +|* <b> = <c>" with single spaces; anything else is rejected.
  std::istringstream in(text);
  std::string a, op, b, eq, c, extra;
  if (!(in >> a >> op >> b >> eq >> c)) return std::nullopt;
  if (in >> extra) return std::nullopt;
  if (eq != "=") return std::nullopt;
  if (op != "+" && op != "*") return std::nullopt;
  const auto lhs = parse_ll(a);
  const auto operand = parse_ll(b);
  const auto stated = parse_ll(c);
  if (!lhs || !operand || !stated) return std::nullopt;
  ParsedStep parsed;
  parsed.lhs = *lhs;
  parsed.kind = (op == "+") ? OpKind::Add : OpKind::Mul;
  parsed.operand = *operand;
  parsed.stated = *stated;
  return parsed;
}

std::optional<long long> parse_start_value(const std::string& statement) {
  static const std::string kPrefix = "Start with ";
  const size_t pos = statement.find(kPrefix);
  if (pos == std::string::npos) return std::nullopt;
  size_t begin = pos + kPrefix.size();
  size_t end = begin;
  while (end < statement.size() &&
         std::isdigit(static_cast<unsigned char>(statement[end]))) {
    ++end;
  }
  if (end == begin) return std::nullopt;
  return parse_ll(std::string_view(statement).substr(begin, end - begin));
}

std::optional<FirstErrorLabel> oracle_first_error(const ReasoningTrace& trace) {
  const auto start = parse_start_value(trace.problem.statement);
  if (!start) return std::nullopt;
  long long prev = *start;
  for (int t = 0; t < trace.step_count(); ++t) {
    const auto parsed = parse_step_text(trace.steps[static_cast<size_t>(t)].text);
    // A step that is not even a well-formed chain step counts as the first
    // error: nothing after it can be assessed as a continuation.
    if (!parsed) return FirstErrorLabel::at(t);
    const ChainOp op{parsed->kind, parsed->operand};
    if (parsed->lhs != prev || parsed->stated != op.apply(parsed->lhs)) {
      return FirstErrorLabel::at(t);
    }
    prev = parsed->stated;
  }
  return FirstErrorLabel::all_correct();
}

// ============================================================================
// Scripted backend
// ============================================================================

namespace {

// Trims trailing whitespace/newlines.
std::string_view rtrim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct PromptedStep {
  int index = 0;
  std::string text;
};

// Pulls "Step <k>: <text>" out of one step-verification user turn (the
// stepwise-v1 layout: optional statement, blank line, step line, blank line,
// closing question).
std::optional<PromptedStep> extract_step(const std::string& content) {
  const size_t qpos = content.rfind(kStepQuestion);
  if (qpos == std::string::npos) return std::nullopt;
  const std::string_view body = rtrim(std::string_view(content).substr(0, qpos));
  const size_t spos = body.find("Step ");
  if (spos == std::string::npos) return std::nullopt;
  std::string_view rest = body.substr(spos + 5);
  size_t digits = 0;
  while (digits < rest.size() && std::isdigit(static_cast<unsigned char>(rest[digits]))) {
    ++digits;
  }
  if (digits == 0 || rest.substr(digits, 2) != ": ") return std::nullopt;
  const auto index = parse_ll(rest.substr(0, digits));
  if (!index || *index < 1) return std::nullopt;
  PromptedStep step;
  step.index = static_cast<int>(*index);
  step.text = std::string(rest.substr(digits + 2));
  return step;
}

// Truncates to the first n whitespace-delimited words; the scripted stand-in
// for a token limit.
std::string truncate_words(const std::string& text, int max_words) {
  int count = 0;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    if (count == max_words) return std::string(rtrim(std::string_view(text).substr(0, i)));
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    ++count;
  }
  return text;
}

const char* kCannotAssess = "I cannot assess this.";

}  // namespace

std::string ScriptedBackend::respond(const CompletionRequest& request) const {
  // Collect the conversation's user turns: first carries the statement and
  // step 1, later ones carry one step each.
  std::optional<long long> start;
  std::vector<PromptedStep> steps;
  for (const ChatMessage& message : request.messages) {
    if (message.role != Role::User) continue;
    if (!start) {
      start = parse_start_value(message.content);
      if (!start) return kCannotAssess;
    }
    const auto step = extract_step(message.content);
    if (!step) return kCannotAssess;
    steps.push_back(*step);
  }
  if (!start || steps.empty()) return kCannotAssess;

  // Verify the most recent step against the value stated one step earlier.
  const PromptedStep& current = steps.back();
  const long long prev = steps.size() == 1 ? *start : [&] {
    const auto prior = parse_step_text(steps[steps.size() - 2].text);
    return prior ? prior->stated : *start;
  }();
  const auto parsed = parse_step_text(current.text);
  if (!parsed) {
    return "<think>\nThe step is not a valid arithmetic operation. Step " +
           std::to_string(current.index) + " is incorrect.\n</think>\nAnswer: -";
  }
  const ChainOp op{parsed->kind, parsed->operand};
  if (parsed->lhs != prev) {
    return "<think>\nThe running value is " + std::to_string(prev) +
           ", but this step starts from " + std::to_string(parsed->lhs) + ". Step " +
           std::to_string(current.index) + " is incorrect.\n</think>\nAnswer: -";
  }
  if (parsed->stated != op.apply(parsed->lhs)) {
    return "<think>\nComputing " + std::to_string(parsed->lhs) +
           (op.kind == OpKind::Add ? " + " : " * ") + std::to_string(parsed->operand) +
           " gives " + std::to_string(op.apply(parsed->lhs)) + ", but this step states " +
           std::to_string(parsed->stated) + ". Step " + std::to_string(current.index) +
           " is incorrect.\n</think>\nAnswer: -";
  }
  return kFastReply;
}

std::vector<std::string> ScriptedBackend::complete(const CompletionRequest& request) {
  request.validate();
  count_call();
  const std::string reply = truncate_words(respond(request), request.max_tokens);
  return std::vector<std::string>(static_cast<size_t>(request.n), reply);
}

// ============================================================================
// Scripted judge & completer
// ============================================================================

JudgeDecision ScriptedJudge::judge(const Problem& problem, const ReasoningTrace& trace,
                                   FirstErrorLabel proposed) {
  if (!proposed.valid_for(trace.step_count())) {
    throw contract_error("scripted judge: proposed label out of range");
  }
  const auto truth = oracle_first_error(trace);
  if (!truth) throw domain_error("scripted judge: trace is not a chain task");
  const bool matches = (*truth == proposed);

  // Flip decision is a pure function of (seed, problem, steps, proposal), so
  // results are identical however the corpus is sharded across workers.
  std::string identity = problem.id;
  identity += '\x1e';
  identity += std::to_string(proposed.value);
  for (const Step& step : trace.steps) {
    identity += '\x1f';
    identity += step.text;
  }
  SplitMix64 rng(rng::derive_seed(seed_, rng::fnv1a(identity)));
  const bool flip = rng.next_bernoulli(flip_rate_);
  const bool agrees = flip ? !matches : matches;

  JudgeDecision decision;
  decision.agrees = agrees;
  decision.rationale = agrees
                           ? "the annotation matches an independent arithmetic check"
                           : "the annotation contradicts an independent arithmetic check";
  return decision;
}

Completion SynthCompleter::complete(const ReasoningTrace& prefix, uint64_t sample_seed) {
  count_sample();
  auto spec = spec_from_id(prefix.problem.id);
  if (!spec) {
    throw domain_error("completer: problem id '" + prefix.problem.id +
                       "' does not name a synthetic task");
  }
  if (error_rate_) spec->error_rate = *error_rate_;
  return synth_complete(prefix, *spec, sample_seed);
}

}  // namespace dyve::synth
