#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dyve/core.hpp"
#include "dyve/verifier.hpp"

namespace dyve::evalharness {

// One benchmark case: a step-annotated solution whose gold label is the
// 0-based earliest error index or -1 for an error-free solution.
struct EvalCase {
  std::string id;
  Problem problem;
  std::vector<Step> steps;
  FirstErrorLabel gold;
};

// Loads cases from JSONL ({"id","problem","steps","label"}); malformed lines,
// out-of-range labels, and duplicate ids raise io_error naming the line.
std::vector<EvalCase> load_cases(const std::string& path);

// Harmonic mean of the two bucket accuracies; zero when either is zero.
double f1(double acc_erroneous, double acc_correct);

struct CaseResult {
  std::string id;
  FirstErrorLabel classification;
  std::vector<std::string> generations;
  double seconds = 0.0;
  bool failed = false;  // verifier error; scored as incorrect
};

struct EvalReport {
  // Accuracies are absent when their bucket is empty; f1 is absent unless
  // both buckets are populated.
  std::optional<double> acc_erroneous;
  std::optional<double> acc_correct;
  std::optional<double> f1;
  double mean_seconds = 0.0;
  int total_cases = 0;
  int erroneous_cases = 0;
  int correct_cases = 0;
  int failures = 0;
};

// Builds the report from per-case outcomes (exact-match scoring: the
// classification must equal gold, including the -1 sentinel).
EvalReport summarize(const std::vector<EvalCase>& cases,
                     const std::vector<CaseResult>& results);

// Runs the verifier over every case (fanned out over `workers` threads) and
// aggregates. Per-case verifier failures are scored incorrect and tallied in
// `failures`. When `per_case` is given, it receives one result per case in
// input order. `precomputed` supplies results for already-verified ids
// (resume); those cases make no backend calls.
EvalReport evaluate(const std::vector<EvalCase>& cases,
                    const verifier::VerifierConfig& config, int workers,
                    std::vector<CaseResult>* per_case = nullptr,
                    const std::vector<CaseResult>* precomputed = nullptr);

}  // namespace dyve::evalharness
