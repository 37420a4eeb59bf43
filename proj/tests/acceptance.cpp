// Acceptance gate for the pipeline. Ten criteria, each one test case that
// prints a single [PASS]/[FAIL] line when it finishes. Tolerances are pinned
// in the assertions; bulk checks count violations so a regression reports how
// widespread it is instead of flooding the log.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <unistd.h>

#include "dyve/cli.hpp"
#include "dyve/errors.hpp"
#include "dyve/evalharness.hpp"
#include "dyve/jsonl.hpp"
#include "dyve/rng.hpp"
#include "dyve/rollout.hpp"
#include "dyve/selection.hpp"
#include "dyve/supervision.hpp"
#include "dyve/synth.hpp"
#include "dyve/verifier.hpp"

using namespace dyve;

namespace {

// One acceptance criterion. Expectations accumulate into `ok`; the summary
// line prints when the criterion goes out of scope at the end of its case.
struct Criterion {
  int number;
  const char* name;
  bool ok = true;

  ~Criterion() {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", number, name);
    std::fflush(stdout);
  }
};

#define EXPECT(criterion, ...)                                 \
  do {                                                         \
    const bool expect_ok_ = static_cast<bool>(__VA_ARGS__);    \
    CHECK_MESSAGE(expect_ok_, #__VA_ARGS__);                   \
    (criterion).ok &= expect_ok_;                              \
  } while (0)

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Bumps one stated result and carries the perturbation forward, producing a
// chain trace whose true first error is exactly `zero_based`.
ReasoningTrace corrupt_at(const ReasoningTrace& original, int zero_based) {
  ReasoningTrace trace = original;
  auto broken = synth::parse_step_text(trace.steps[static_cast<size_t>(zero_based)].text);
  REQUIRE(broken.has_value());
  long long running = broken->stated + 1;
  trace.steps[static_cast<size_t>(zero_based)].text =
      synth::render_step(broken->lhs, synth::ChainOp{broken->kind, broken->operand}, running);
  for (size_t i = static_cast<size_t>(zero_based) + 1; i < trace.steps.size(); ++i) {
    auto step = synth::parse_step_text(trace.steps[i].text);
    REQUIRE(step.has_value());
    const synth::ChainOp op{step->kind, step->operand};
    const long long next = op.apply(running);
    trace.steps[i].text = synth::render_step(running, op, next);
    running = next;
  }
  return trace;
}

// Passes requests through while keeping a copy of each, so the gate can see
// exactly what the verifier put on the wire.
class RecordingBackend : public Backend {
 public:
  explicit RecordingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}

  std::vector<std::string> complete(const CompletionRequest& request) override {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      requests.push_back(request);
    }
    return inner_->complete(request);
  }
  std::optional<double> virtual_cost_per_call() const override {
    return inner_->virtual_cost_per_call();
  }

  std::vector<CompletionRequest> requests;

 private:
  std::shared_ptr<Backend> inner_;
  std::mutex mutex_;
};

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_command(args, out, err);
  return {code, out.str(), err.str()};
}

// Scratch directory under the system temp root, removed on scope exit.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& stem) {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           (stem + "-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

bool same_report(const evalharness::EvalReport& a, const evalharness::EvalReport& b) {
  return a.acc_erroneous == b.acc_erroneous && a.acc_correct == b.acc_correct &&
         a.f1 == b.f1 && a.mean_seconds == b.mean_seconds && a.total_cases == b.total_cases &&
         a.erroneous_cases == b.erroneous_cases && a.correct_cases == b.correct_cases &&
         a.failures == b.failures;
}

}  // namespace

// ============================================================================
// 1. First-error localization
// ============================================================================

TEST_CASE("criterion 1") {
  Criterion c{1, "first-error search matches an exhaustive scan within its probe budget"};
  const auto start = std::chrono::steady_clock::now();

  synth::SynthCompleter exact(0.0);  // estimates become exact indicators
  int rollouts_checked = 0;
  int wrong_labels = 0;
  int over_budget = 0;
  int scan_mismatches = 0;

  auto check_one = [&](const Problem& problem, const ReasoningTrace& trace, int expected) {
    const int T = trace.step_count();
    const int budget =
        static_cast<int>(std::ceil(std::log2(static_cast<double>(T)))) + 1;
    rollout::TreeConfig config;
    config.mc_samples = 4;
    rollout::StateTree tree(problem, exact, config,
                            424200 + static_cast<uint64_t>(rollouts_checked));
    const auto labeled = tree.label_rollout(trace);
    wrong_labels += labeled.label.value != expected;
    over_budget += labeled.estimator_calls > budget;

    // Exhaustive reference: scan prefixes left to right with the same
    // estimator and stop at the first one whose completions all fail.
    int scan = -1;
    for (int len = 1; len <= T; ++len) {
      if (rollout::estimate_mc(trace_prefix(trace, len), exact, 4, 1) == 0.0) {
        scan = len - 1;
        break;
      }
    }
    scan_mismatches += labeled.label.value != scan;
    ++rollouts_checked;
  };

  // Every error position (and none) at every chain length, twice over.
  for (const uint64_t round : {0ULL, 1ULL}) {
    for (int length = 2; length <= 32; ++length) {
      auto [problem, trace, label] = synth::synth_problem(
          synth::SynthTaskSpec{length, 0.0, 100 * static_cast<uint64_t>(length) + round});
      check_one(problem, trace, -1);
      for (int where = 0; where < length; ++where) {
        check_one(problem, corrupt_at(trace, where), where);
      }
    }
  }

  // Mixed corpora whose error positions come from the synthesis rates.
  for (const double rate : {0.1, 0.3, 0.5}) {
    for (int k = 0; k < 50; ++k) {
      const int length = 2 + k % 31;
      auto [problem, trace, label] = synth::synth_problem(synth::SynthTaskSpec{
          length, rate, 555000 + static_cast<uint64_t>(k) + static_cast<uint64_t>(rate * 100)});
      check_one(problem, trace, label.value);
    }
  }

  CAPTURE(rollouts_checked);
  CAPTURE(wrong_labels);
  CAPTURE(over_budget);
  CAPTURE(scan_mismatches);
  EXPECT(c, rollouts_checked >= 1000);
  EXPECT(c, wrong_labels == 0);
  EXPECT(c, over_budget == 0);
  EXPECT(c, scan_mismatches == 0);
  EXPECT(c, seconds_since(start) < 60.0);
}

// ============================================================================
// 2. Monte Carlo estimate accuracy
// ============================================================================

TEST_CASE("criterion 2") {
  Criterion c{2, "success estimates track analytic completion rates"};
  const auto start = std::chrono::steady_clock::now();

  // Error-free prefixes with r steps left and per-step failure rate e complete
  // correctly with probability (1-e)^r; the 400-sample estimate should land
  // within 0.05 of that for at least 95% of prefixes.
  const double rates[] = {0.1, 0.2, 0.3, 0.5};
  const int prefixes = 200;
  int within = 0;
  for (int k = 0; k < prefixes; ++k) {
    const int keep = k % 8;
    const double rate = rates[k % 4];
    auto [problem, trace, label] =
        synth::synth_problem(synth::SynthTaskSpec{8, 0.0, 5000 + static_cast<uint64_t>(k)});
    synth::SynthCompleter completer(rate);
    const double expected = std::pow(1.0 - rate, 8 - keep);
    const double estimate =
        rollout::estimate_mc(trace_prefix(trace, keep), completer, 400,
                             6000 + static_cast<uint64_t>(k));
    within += std::abs(estimate - expected) <= 0.05;
  }
  CAPTURE(within);
  EXPECT(c, within >= 190);

  // The endpoints are exact, not merely close.
  auto [problem, trace, label] =
      synth::synth_problem(synth::SynthTaskSpec{8, 0.0, 4999});
  synth::SynthCompleter sure(0.0);
  synth::SynthCompleter doomed(1.0);
  EXPECT(c, rollout::estimate_mc(trace_prefix(trace, 3), sure, 32, 9) == 1.0);
  EXPECT(c, rollout::estimate_mc(trace_prefix(trace, 3), doomed, 32, 9) == 0.0);
  EXPECT(c, rollout::estimate_mc(trace_prefix(corrupt_at(trace, 1), 3), sure, 32, 9) == 0.0);

  EXPECT(c, seconds_since(start) < 30.0);
}

// ============================================================================
// 3. Selection scoring
// ============================================================================

TEST_CASE("criterion 3") {
  Criterion c{3, "prioritization scores match their closed forms"};

  // Exploration bonus: c * sqrt(sibling visits) / (1 + own visits).
  EXPECT(c, std::abs(rollout::puct_score(3, 16, 1.25) - 1.25) <= 1e-12);
  EXPECT(c, rollout::puct_score(0, 16, 1.25) == 5.0);
  EXPECT(c, rollout::puct_score(0, 0, 1.25) == 0.0);
  for (int visits = 1; visits <= 8; ++visits) {
    EXPECT(c, rollout::puct_score(visits - 1, 16, 1.25) >
                  rollout::puct_score(visits, 16, 1.25));
  }

  // Rollout quality: alpha^(1-mc) * beta^(len/length_scale).
  rollout::TreeConfig config;  // alpha 0.5, beta 0.9, length_scale 500
  EXPECT(c, rollout::q_value(1.0, 0, config) == 1.0);
  EXPECT(c, std::abs(rollout::q_value(0.0, 0, config) - 0.5) <= 1e-12);
  EXPECT(c, std::abs(rollout::q_value(0.5, 500, config) - std::sqrt(0.5) * 0.9) <= 1e-12);
  EXPECT(c, rollout::q_value(0.9, 40, config) > rollout::q_value(0.5, 40, config));
  EXPECT(c, rollout::q_value(0.5, 40, config) > rollout::q_value(0.5, 400, config));

  // A fresh mediocre rollout outranks a well-visited strong one, and ties
  // break to the earliest entry.
  const std::vector<rollout::PoolCandidate> pool = {{0.9, 3, 0}, {0.2, 0, 0}};
  EXPECT(c, rollout::select_rollout(pool, config) == 1);
  const std::vector<rollout::PoolCandidate> uniform(4, rollout::PoolCandidate{0.5, 0, 10});
  EXPECT(c, rollout::select_rollout(uniform, config) == 0);
}

// ============================================================================
// 4. Consensus filtering
// ============================================================================

TEST_CASE("criterion 4") {
  Criterion c{4, "consensus filtering keeps exactly label-consistent rollouts"};

  // 100 annotated rollouts, 60 with truthful labels, 40 with planted lies.
  std::vector<supervision::CuratedRollout> rollouts;
  std::set<std::string> good_ids;
  for (int k = 0; k < 100; ++k) {
    auto [problem, trace, label] =
        synth::synth_problem(synth::SynthTaskSpec{6, 0.0, 8800 + static_cast<uint64_t>(k)});
    const std::string id = "r" + std::to_string(k);
    const int where = k % 6;
    const ReasoningTrace broken = corrupt_at(trace, where);

    supervision::CuratedRollout item;
    item.id = id;
    if (k % 5 < 3) {
      good_ids.insert(id);
      if (k % 2 == 0) {
        item.trace = trace;
        item.label = FirstErrorLabel::all_correct();
      } else {
        item.trace = broken;
        item.label = FirstErrorLabel::at(where);
      }
    } else {
      if (k % 2 == 0) {
        item.trace = trace;
        item.label = FirstErrorLabel::at(where);
      } else {
        item.trace = broken;
        item.label = FirstErrorLabel::all_correct();
      }
    }
    item.trace.problem.id = id;
    rollouts.push_back(std::move(item));
  }

  synth::ScriptedJudge faithful(0.0, 99);
  const auto outcome = supervision::consensus_filter(rollouts, faithful, 8);
  EXPECT(c, outcome.kept.size() == good_ids.size());
  int misplaced = 0;
  for (const auto& kept : outcome.kept) {
    misplaced += good_ids.count(kept.rollout.id) == 0;
  }
  CAPTURE(misplaced);
  EXPECT(c, misplaced == 0);
  EXPECT(c, outcome.report.size() == rollouts.size());

  // An uninformative judge keeps about half of a large batch.
  auto [problem, trace, label] = synth::synth_problem(synth::SynthTaskSpec{4, 0.0, 8801});
  std::vector<supervision::CuratedRollout> big;
  big.reserve(10000);
  for (int k = 0; k < 10000; ++k) {
    supervision::CuratedRollout item;
    item.id = "q" + std::to_string(k);
    item.trace = trace;
    item.trace.problem.id = item.id;
    item.label = FirstErrorLabel::all_correct();
    big.push_back(std::move(item));
  }
  synth::ScriptedJudge coin(0.5, 7);
  const auto flipped = supervision::consensus_filter(big, coin, 8);
  const double kept_rate = static_cast<double>(flipped.kept.size()) / 10000.0;
  CAPTURE(kept_rate);
  EXPECT(c, std::abs(kept_rate - 0.5) <= 0.02);
}

// ============================================================================
// 5. Class rebalancing
// ============================================================================

TEST_CASE("criterion 5") {
  Criterion c{5, "class rebalancing equalizes step labels"};

  int unbalanced = 0;
  int minority_losses = 0;
  int order_breaks = 0;
  for (int k = 0; k < 500; ++k) {
    const int positives = 1 + (7 * k) % 40;
    const int negatives = 1 + (13 * k + 5) % 40;

    // Interleave the classes so survivors must be re-sorted into input order.
    std::vector<supervision::StepExample> examples;
    int p = 0, n = 0;
    while (p < positives || n < negatives) {
      if (p < positives) examples.push_back({"p" + std::to_string(p), p, true}), ++p;
      if (n < negatives) examples.push_back({"n" + std::to_string(n), n, false}), ++n;
    }

    const auto balanced =
        supervision::rebalance(examples, 1000 + static_cast<uint64_t>(k));

    int kept_pos = 0, kept_neg = 0;
    for (const auto& example : balanced) (example.positive ? kept_pos : kept_neg) += 1;
    const int want = std::min(positives, negatives);
    unbalanced += (kept_pos != want || kept_neg != want);

    // The minority class survives untouched.
    const bool minority_positive = positives <= negatives;
    std::set<std::string> kept_minority;
    for (const auto& example : balanced) {
      if (example.positive == minority_positive) kept_minority.insert(example.rollout_id);
    }
    minority_losses += static_cast<int>(kept_minority.size()) != want;

    // Survivors appear in input order (a subsequence of the input).
    size_t cursor = 0;
    bool ordered = true;
    for (const auto& survivor : balanced) {
      while (cursor < examples.size() &&
             (examples[cursor].rollout_id != survivor.rollout_id ||
              examples[cursor].positive != survivor.positive)) {
        ++cursor;
      }
      if (cursor == examples.size()) {
        ordered = false;
        break;
      }
      ++cursor;
    }
    order_breaks += !ordered;
  }
  CAPTURE(unbalanced);
  CAPTURE(minority_losses);
  CAPTURE(order_breaks);
  EXPECT(c, unbalanced == 0);
  EXPECT(c, minority_losses == 0);
  EXPECT(c, order_breaks == 0);

  // Same seed, same survivors.
  std::vector<supervision::StepExample> examples;
  for (int i = 0; i < 9; ++i) examples.push_back({"p" + std::to_string(i), i, true});
  for (int i = 0; i < 4; ++i) examples.push_back({"n" + std::to_string(i), i, false});
  const auto once = supervision::rebalance(examples, 42);
  const auto again = supervision::rebalance(examples, 42);
  bool deterministic = once.size() == again.size();
  for (size_t i = 0; deterministic && i < once.size(); ++i) {
    deterministic = once[i].rollout_id == again[i].rollout_id;
  }
  EXPECT(c, deterministic);
}

// ============================================================================
// 6. Training-target fidelity
// ============================================================================

TEST_CASE("criterion 6") {
  Criterion c{6, "emitted training targets re-parse to their intended verdicts"};

  int records_emitted = 0;
  int verdict_mismatches = 0;
  int malformed_roles = 0;
  int count_mismatches = 0;
  synth::ScriptedBackend reasoner;

  for (int k = 0; k < 200; ++k) {
    auto [problem, trace, label] =
        synth::synth_problem(synth::SynthTaskSpec{6, 0.0, 6600 + static_cast<uint64_t>(k)});
    const int error_at = (k % 7) - 1;  // -1 = clean, else first error index

    supervision::JudgedLabel judged;
    judged.rollout.id = "r" + std::to_string(k);
    judged.rollout.trace = error_at < 0 ? trace : corrupt_at(trace, error_at);
    judged.rollout.trace.problem.id = judged.rollout.id;
    judged.rollout.label =
        error_at < 0 ? FirstErrorLabel::all_correct() : FirstErrorLabel::at(error_at);

    const auto flags = supervision::flag_steps(judged, reasoner);
    std::vector<supervision::SftRecord> records;
    supervision::emit_sft_records(flags, judged.rollout,
                                  [&](const supervision::SftRecord& record) {
                                    records.push_back(record);
                                  });

    const size_t expected_records = error_at < 0 ? 6 : static_cast<size_t>(error_at) + 1;
    count_mismatches += records.size() != expected_records;

    for (size_t i = 0; i < records.size(); ++i) {
      const auto verdict = verifier::parse_verdict(records[i].turns.back().content);
      const bool is_error_step = error_at >= 0 && i == static_cast<size_t>(error_at);
      verdict_mismatches += verdict.kind != (is_error_step ? VerdictKind::Incorrect
                                                           : VerdictKind::Correct);
      for (size_t t = 0; t < records[i].turns.size(); ++t) {
        malformed_roles +=
            records[i].turns[t].role != (t % 2 == 0 ? Role::User : Role::Assistant);
      }
      ++records_emitted;
    }
  }
  CAPTURE(records_emitted);
  CAPTURE(verdict_mismatches);
  CAPTURE(malformed_roles);
  CAPTURE(count_mismatches);
  EXPECT(c, records_emitted >= 200);
  EXPECT(c, verdict_mismatches == 0);
  EXPECT(c, malformed_roles == 0);
  EXPECT(c, count_mismatches == 0);

  // Reference transcripts: both parse to their verdicts, and the emission
  // path reproduces them byte for byte from the same review notes.
  const std::string affirm =
      "<think>\nRechecking the subtraction: 41 - 17 = 24, which matches the stated total, "
      "so this line holds.\n</think>\nAnswer: +";
  const std::string reject =
      "<think>\nThe line claims 12 * 4 = 50, but 12 * 4 = 48, so the chain breaks "
      "here.\n</think>\nAnswer: -";
  EXPECT(c, verifier::parse_verdict(affirm).kind == VerdictKind::Correct);
  EXPECT(c, verifier::parse_verdict(reject).kind == VerdictKind::Incorrect);
  EXPECT(c, verifier::first_think_body(affirm).has_value());

  auto [problem, trace, label] = synth::synth_problem(synth::SynthTaskSpec{2, 0.0, 6789});

  supervision::CuratedRollout clean{"fa", trace, FirstErrorLabel::all_correct()};
  std::vector<supervision::StepFlag> deep_ok(1);
  deep_ok[0] = {0, supervision::StepMode::Deep,
                "Rechecking the subtraction: 41 - 17 = 24, which matches the stated total, "
                "so this line holds."};
  std::vector<supervision::SftRecord> ok_records;
  supervision::emit_sft_records(deep_ok, clean, [&](const supervision::SftRecord& record) {
    ok_records.push_back(record);
  });
  EXPECT(c, ok_records.size() == 1);
  EXPECT(c, ok_records.at(0).turns.back().content == affirm);

  supervision::CuratedRollout broken{"fb", corrupt_at(trace, 0), FirstErrorLabel::at(0)};
  std::vector<supervision::StepFlag> deep_bad(1);
  deep_bad[0] = {0, supervision::StepMode::Deep,
                 "The line claims 12 * 4 = 50, but 12 * 4 = 48, so the chain breaks here."};
  std::vector<supervision::SftRecord> bad_records;
  supervision::emit_sft_records(deep_bad, broken, [&](const supervision::SftRecord& record) {
    bad_records.push_back(record);
  });
  EXPECT(c, bad_records.size() == 1);
  EXPECT(c, bad_records.at(0).turns.back().content == reject);
}

// ============================================================================
// 7. Verifier halting and prefix isolation
// ============================================================================

TEST_CASE("criterion 7") {
  Criterion c{7, "verification halts at the first rejection and never reads ahead"};

  int traces_checked = 0;
  int classification_misses = 0;
  int generation_miscounts = 0;
  int request_miscounts = 0;
  int sentinel_leaks = 0;

  for (int k = 0; k < 1000; ++k) {
    const uint64_t h = rng::derive_seed(777, static_cast<uint64_t>(k));
    const int length = 1 + static_cast<int>(h % 12);
    const int error_at = static_cast<int>((h >> 8) % static_cast<uint64_t>(length + 1)) - 1;

    auto [problem, trace, label] = synth::synth_problem(
        synth::SynthTaskSpec{length, 0.0, 30000 + static_cast<uint64_t>(k)});
    ReasoningTrace subject = error_at < 0 ? trace : corrupt_at(trace, error_at);

    // Steps past the first error are never read, so their content may be
    // anything — plant a marker that must not appear on the wire.
    if (error_at >= 0) {
      for (size_t i = static_cast<size_t>(error_at) + 1; i < subject.steps.size(); ++i) {
        subject.steps[i].text = "SENTINEL_LATER " + std::to_string(i);
      }
    }

    auto recorder = std::make_shared<RecordingBackend>(std::make_shared<synth::ScriptedBackend>());
    verifier::VerifierConfig config;
    config.backend = recorder;
    const auto result = verifier::verify_trace(problem, subject.steps, config);

    const int expected_generations = error_at < 0 ? length : error_at + 1;
    classification_misses += result.classification.value != error_at;
    generation_miscounts += static_cast<int>(result.generations.size()) != expected_generations;
    request_miscounts += static_cast<int>(recorder->requests.size()) != expected_generations;

    for (const auto& request : recorder->requests) {
      for (const auto& message : request.messages) {
        sentinel_leaks += message.content.find("SENTINEL_LATER") != std::string::npos;
      }
    }
    ++traces_checked;
  }

  CAPTURE(traces_checked);
  CAPTURE(classification_misses);
  CAPTURE(generation_miscounts);
  CAPTURE(request_miscounts);
  CAPTURE(sentinel_leaks);
  EXPECT(c, traces_checked == 1000);
  EXPECT(c, classification_misses == 0);
  EXPECT(c, generation_miscounts == 0);
  EXPECT(c, request_miscounts == 0);
  EXPECT(c, sentinel_leaks == 0);
}

// ============================================================================
// 8. Evaluation scoring
// ============================================================================

TEST_CASE("criterion 8") {
  Criterion c{8, "evaluation scoring is exact and worker-invariant"};

  EXPECT(c, std::abs(evalharness::f1(0.6, 0.75) - 2.0 * 0.6 * 0.75 / 1.35) <= 1e-12);
  EXPECT(c, std::abs(evalharness::f1(0.6, 0.75) - 0.6667) <= 1e-4);
  EXPECT(c, evalharness::f1(1.0, 1.0) == 1.0);
  EXPECT(c, evalharness::f1(0.0, 0.9) == 0.0);

  // 20 clean + 20 erroneous cases with known annotations.
  std::vector<evalharness::EvalCase> cases;
  for (int k = 0; k < 20; ++k) {
    auto [problem, trace, label] =
        synth::synth_problem(synth::SynthTaskSpec{6, 0.0, 77000 + static_cast<uint64_t>(k)});
    evalharness::EvalCase clean;
    clean.id = "c" + std::to_string(k);
    clean.problem = problem;
    clean.problem.id = clean.id;
    clean.steps = trace.steps;
    clean.gold = FirstErrorLabel::all_correct();
    cases.push_back(clean);

    const int where = k % 6;
    evalharness::EvalCase erroneous;
    erroneous.id = "e" + std::to_string(k);
    erroneous.problem = problem;
    erroneous.problem.id = erroneous.id;
    erroneous.steps = corrupt_at(trace, where).steps;
    erroneous.gold = FirstErrorLabel::at(where);
    cases.push_back(erroneous);
  }

  // A faithful checker earns a perfect score.
  verifier::VerifierConfig faithful;
  faithful.backend = std::make_shared<synth::ScriptedBackend>();
  std::vector<evalharness::CaseResult> per_case;
  const auto report = evalharness::evaluate(cases, faithful, 4, &per_case);
  EXPECT(c, report.total_cases == 40);
  EXPECT(c, report.failures == 0);
  EXPECT(c, report.acc_correct.has_value() && *report.acc_correct == 1.0);
  EXPECT(c, report.acc_erroneous.has_value() && *report.acc_erroneous == 1.0);
  EXPECT(c, report.f1.has_value() && *report.f1 == 1.0);
  int recovered_misses = 0;
  for (size_t i = 0; i < cases.size(); ++i) {
    recovered_misses += !(per_case[i].classification == cases[i].gold);
  }
  CAPTURE(recovered_misses);
  EXPECT(c, recovered_misses == 0);

  // A rubber stamp aces the clean bucket, misses every error, and scores zero.
  verifier::VerifierConfig stamp;
  stamp.backend = std::make_shared<ConstantBackend>("+");
  const auto stamped = evalharness::evaluate(cases, stamp, 4);
  EXPECT(c, stamped.acc_correct.has_value() && *stamped.acc_correct == 1.0);
  EXPECT(c, stamped.acc_erroneous.has_value() && *stamped.acc_erroneous == 0.0);
  EXPECT(c, stamped.f1.has_value() && *stamped.f1 == 0.0);

  // The report is a pure function of the cases, whatever the fan-out.
  std::vector<evalharness::CaseResult> serial_results, mid_results, wide_results;
  const auto serial = evalharness::evaluate(cases, faithful, 1, &serial_results);
  const auto mid = evalharness::evaluate(cases, faithful, 8, &mid_results);
  const auto wide = evalharness::evaluate(cases, faithful, 32, &wide_results);
  EXPECT(c, same_report(serial, mid));
  EXPECT(c, same_report(serial, wide));
  int divergences = 0;
  for (size_t i = 0; i < serial_results.size(); ++i) {
    divergences += !(serial_results[i].classification == wide_results[i].classification &&
                     serial_results[i].generations == wide_results[i].generations &&
                     serial_results[i].seconds == wide_results[i].seconds &&
                     serial_results[i].id == wide_results[i].id);
    divergences += !(serial_results[i].classification == mid_results[i].classification &&
                     serial_results[i].generations == mid_results[i].generations);
  }
  CAPTURE(divergences);
  EXPECT(c, divergences == 0);
}

// ============================================================================
// 9. Answer selection
// ============================================================================

TEST_CASE("criterion 9") {
  Criterion c{9, "verifier-guided selection dominates majority voting"};
  const auto start = std::chrono::steady_clock::now();

  verifier::VerifierConfig config;
  config.backend = std::make_shared<synth::ScriptedBackend>();

  // Eight candidates that are each right half the time: reranking with a
  // sound checker answers correctly whenever any candidate is right,
  // 1 - 0.5^8 = 0.99609375 of problems.
  selection::ScriptedProposer proposer(0.5);
  int rm_hits = 0;
  int maj_hits = 0;
  int pointwise_violations = 0;
  const int problems = 10000;
  for (int k = 0; k < problems; ++k) {
    auto [problem, trace, label] = synth::synth_problem(
        synth::SynthTaskSpec{6, 0.0, 90000 + static_cast<uint64_t>(k)});
    const auto outcome = selection::best_of_n(problem, proposer, config, 8,
                                              1234500 + static_cast<uint64_t>(k));
    rm_hits += outcome.rm_correct ? 1 : 0;
    maj_hits += outcome.maj_correct ? 1 : 0;
    pointwise_violations += (outcome.maj_correct && !outcome.rm_correct) ? 1 : 0;
  }
  const double rm_rate = static_cast<double>(rm_hits) / problems;
  const double maj_rate = static_cast<double>(maj_hits) / problems;
  CAPTURE(rm_rate);
  CAPTURE(maj_rate);
  CAPTURE(pointwise_violations);
  EXPECT(c, std::abs(rm_rate - 0.99609375) <= 0.005);
  EXPECT(c, pointwise_violations == 0);
  EXPECT(c, rm_rate >= maj_rate);

  // Smaller candidate budgets keep the same dominance.
  for (const int n : {1, 2, 4}) {
    int rm_n = 0;
    int maj_n = 0;
    int violations_n = 0;
    for (int k = 0; k < 2000; ++k) {
      auto [problem, trace, label] = synth::synth_problem(synth::SynthTaskSpec{
          6, 0.0, 70000 + static_cast<uint64_t>(n) * 3000 + static_cast<uint64_t>(k)});
      const auto outcome = selection::best_of_n(
          problem, proposer, config, n,
          7700000 + static_cast<uint64_t>(n) * 10000 + static_cast<uint64_t>(k));
      rm_n += outcome.rm_correct ? 1 : 0;
      maj_n += outcome.maj_correct ? 1 : 0;
      violations_n += (outcome.maj_correct && !outcome.rm_correct) ? 1 : 0;
    }
    CAPTURE(n);
    CAPTURE(rm_n);
    CAPTURE(maj_n);
    EXPECT(c, violations_n == 0);
    EXPECT(c, rm_n >= maj_n);
  }

  EXPECT(c, seconds_since(start) < 120.0);
}

// ============================================================================
// 10. Pipeline reproducibility
// ============================================================================

namespace {

const char* kGateConfig =
    "[run]\n"
    "seed = 17\n"
    "workers = 2\n"
    "[synth]\n"
    "count = 8\n"
    "chain_length = 4\n"
    "error_rate = 0.5\n"
    "[tree]\n"
    "mc_samples = 4\n"
    "rollouts_per_query = 2\n"
    "search_limit = 30\n";

// synth -> rollout -> curate -> eval, with optional extra flags per command.
bool run_gate_pipeline(const TempDir& dir, const std::string& cfg,
                       const std::vector<std::string>& extra) {
  auto stage = [&](std::vector<std::string> args) {
    args.insert(args.end(), extra.begin(), extra.end());
    const CliResult result = run_cli(args);
    CAPTURE(result.err);
    CHECK(result.code == cli::kExitOk);
    return result.code == cli::kExitOk;
  };
  bool ok = stage({"synth", "--config", cfg, "--out", dir.file("queries.jsonl")});
  ok = ok && stage({"rollout", "--config", cfg, "--queries", dir.file("queries.jsonl"),
                    "--out", dir.file("rollouts.jsonl")});
  ok = ok && stage({"curate", "--config", cfg, "--rollouts", dir.file("rollouts.jsonl"),
                    "--queries", dir.file("queries.jsonl"), "--out", dir.file("sft.jsonl"),
                    "--report", dir.file("filter.jsonl")});
  ok = ok && stage({"eval", "--config", cfg, "--cases", dir.file("queries.jsonl"), "--out",
                    dir.file("results.jsonl"), "--report", dir.file("eval.json")});
  return ok;
}

const std::vector<std::string>& gate_artifacts() {
  static const std::vector<std::string> names = {
      "queries.jsonl", "rollouts.jsonl", "sft.jsonl",
      "filter.jsonl",  "results.jsonl",  "eval.json"};
  return names;
}

}  // namespace

TEST_CASE("criterion 10") {
  Criterion c{10, "pipeline artifacts are byte-identical across reruns and worker counts"};

  TempDir first("gate-a");
  TempDir second("gate-b");
  TempDir narrow("gate-c");
  for (const TempDir* dir : {&first, &second, &narrow}) {
    jsonl::write_text_file(dir->file("run.toml"), kGateConfig);
  }

  EXPECT(c, run_gate_pipeline(first, first.file("run.toml"), {}));
  EXPECT(c, run_gate_pipeline(second, second.file("run.toml"), {}));
  EXPECT(c, run_gate_pipeline(narrow, narrow.file("run.toml"), {"--workers", "1"}));

  // The run produced real work to compare.
  EXPECT(c, jsonl::read_trace_records(first.file("queries.jsonl")).size() == 8);
  EXPECT(c, !jsonl::read_rollout_records(first.file("rollouts.jsonl")).empty());
  EXPECT(c, !jsonl::read_text_file(first.file("eval.json")).empty());

  int fresh_run_diffs = 0;
  int worker_diffs = 0;
  for (const auto& name : gate_artifacts()) {
    const std::string bytes = jsonl::read_text_file(first.file(name));
    fresh_run_diffs += bytes != jsonl::read_text_file(second.file(name));
    worker_diffs += bytes != jsonl::read_text_file(narrow.file(name));
  }
  CAPTURE(fresh_run_diffs);
  CAPTURE(worker_diffs);
  EXPECT(c, fresh_run_diffs == 0);
  EXPECT(c, worker_diffs == 0);

  // Rerunning over finished outputs neither redoes nor rewrites anything.
  std::unordered_map<std::string, std::string> before;
  for (const auto& name : gate_artifacts()) {
    before[name] = jsonl::read_text_file(first.file(name));
  }
  EXPECT(c, run_gate_pipeline(first, first.file("run.toml"), {}));
  int rerun_diffs = 0;
  for (const auto& name : gate_artifacts()) {
    rerun_diffs += before[name] != jsonl::read_text_file(first.file(name));
  }
  CAPTURE(rerun_diffs);
  EXPECT(c, rerun_diffs == 0);
}
