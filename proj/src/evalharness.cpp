#include "dyve/evalharness.hpp"

#include <cstdio>
#include <unordered_map>
#include <utility>

#include "dyve/errors.hpp"
#include "dyve/jsonl.hpp"
#include "dyve/worker_pool.hpp"

namespace dyve::evalharness {

std::vector<EvalCase> load_cases(const std::string& path) {
  const auto records = jsonl::read_trace_records(path);
  if (records.empty()) {
    std::fprintf(stderr, "warning: %s contains no cases\n", path.c_str());
  }
  std::vector<EvalCase> cases;
  cases.reserve(records.size());
  for (const auto& record : records) {
    EvalCase item;
    item.id = record.id;
    item.problem = Problem{record.id, record.problem, record.gold};
    item.steps.reserve(record.steps.size());
    for (size_t i = 0; i < record.steps.size(); ++i) {
      item.steps.push_back(Step{static_cast<int>(i) + 1, record.steps[i]});
    }
    item.gold = FirstErrorLabel{record.label};
    cases.push_back(std::move(item));
  }
  return cases;
}

double f1(double acc_erroneous, double acc_correct) {
  if (acc_erroneous < 0.0 || acc_erroneous > 1.0 || acc_correct < 0.0 ||
      acc_correct > 1.0) {
    throw contract_error("f1 requires accuracies in [0, 1]");
  }
  const double sum = acc_erroneous + acc_correct;
  if (sum == 0.0) {
    return 0.0;
  }
  return 2.0 * acc_erroneous * acc_correct / sum;
}

EvalReport summarize(const std::vector<EvalCase>& cases,
                     const std::vector<CaseResult>& results) {
  if (cases.size() != results.size()) {
    throw contract_error("summarize requires one result per case");
  }
  EvalReport report;
  report.total_cases = static_cast<int>(cases.size());
  int erroneous_hits = 0;
  int correct_hits = 0;
  double seconds_sum = 0.0;
  for (size_t i = 0; i < cases.size(); ++i) {
    const auto& gold = cases[i].gold;
    const auto& result = results[i];
    const bool hit = !result.failed && result.classification == gold;
    if (gold.is_all_correct()) {
      ++report.correct_cases;
      correct_hits += hit ? 1 : 0;
    } else {
      ++report.erroneous_cases;
      erroneous_hits += hit ? 1 : 0;
    }
    if (result.failed) {
      ++report.failures;
    }
    seconds_sum += result.seconds;
  }
  if (report.total_cases > 0) {
    report.mean_seconds = seconds_sum / report.total_cases;
  }
  if (report.erroneous_cases > 0) {
    report.acc_erroneous =
        static_cast<double>(erroneous_hits) / report.erroneous_cases;
  }
  if (report.correct_cases > 0) {
    report.acc_correct = static_cast<double>(correct_hits) / report.correct_cases;
  }
  if (report.acc_erroneous && report.acc_correct) {
    report.f1 = f1(*report.acc_erroneous, *report.acc_correct);
  }
  return report;
}

EvalReport evaluate(const std::vector<EvalCase>& cases,
                    const verifier::VerifierConfig& config, int workers,
                    std::vector<CaseResult>* per_case,
                    const std::vector<CaseResult>* precomputed) {
  config.validate();
  std::unordered_map<std::string, const CaseResult*> cached;
  if (precomputed != nullptr) {
    for (const auto& result : *precomputed) {
      cached[result.id] = &result;
    }
  }
  auto results = parallel_map(cases, workers, [&](const EvalCase& item, size_t) {
    if (auto it = cached.find(item.id); it != cached.end()) {
      return *it->second;
    }
    CaseResult out;
    out.id = item.id;
    try {
      auto verification = verifier::verify_trace(item.problem, item.steps, config);
      out.classification = verification.classification;
      out.generations = std::move(verification.generations);
      out.seconds = verification.seconds;
    } catch (const verifier::verification_error& error) {
      // Partial progress still cost time; keep it for the mean but score the
      // case as a failure.
      out.generations = error.partial().generations;
      out.seconds = error.partial().seconds;
      out.failed = true;
    } catch (const std::runtime_error&) {
      out.failed = true;
    }
    return out;
  });
  if (per_case != nullptr) {
    *per_case = results;
  }
  return summarize(cases, results);
}

}  // namespace dyve::evalharness
