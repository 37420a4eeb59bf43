#pragma once

#include <cstdint>
#include <string>

#include "dyve/rollout.hpp"
#include "dyve/verifier.hpp"

namespace dyve::config {

// Run settings shared by every pipeline stage, loaded from a small TOML-like
// file (sections, key = value, '#' comments). Unknown sections or keys are
// rejected so typos fail loudly. API credentials never appear here; they come
// from the DYVE_API_KEY / DYVE_API_BASE environment variables.
struct RunConfig {
  // [run]
  uint64_t seed = 0;
  bool has_seed = false;  // the CLI requires a seed from the file or --seed
  int workers = 32;

  // [backend]
  std::string backend_kind = "scripted";  // "scripted" | "http"
  std::string base_url;                   // http backend only; env fallback
  std::string model = "default";
  double virtual_cost = 1.0;  // simulated seconds per scripted call
  int max_attempts = 3;
  int backoff_ms = 1000;
  int timeout_seconds = 120;
  int max_in_flight = 32;

  // [synth]
  int synth_count = 200;
  int synth_chain_length = 8;
  double synth_error_rate = 0.2;

  // [tree]
  rollout::TreeConfig tree;
  // Error rate for sampled continuations; negative means each task's own.
  double completion_error_rate = -1.0;

  // [verify]
  int verify_max_tokens = kMaxResponseTokens;
  std::string unparseable_policy = "incorrect";  // "incorrect"|"correct"|"abort"
  double verify_temperature = 0.0;

  // [judge]
  double judge_flip_rate = 0.0;  // scripted judge disagreement rate
  double judge_temperature = 0.0;

  // [bon]
  int bon_n = 8;
  double bon_proposer_p = 0.5;  // scripted proposer per-candidate success rate
  double bon_temperature = 0.7;

  // config_error on any out-of-range value.
  void validate() const;
};

// Parses config text; `source_name` labels error messages. config_error on
// syntax errors, unknown keys, or type mismatches (all name the line).
RunConfig parse_config(const std::string& text, const std::string& source_name);

// Reads and parses a config file (io_error on missing file).
RunConfig load_config(const std::string& path);

// Every setting as one "section.key=value" line, sorted; doubles are printed
// round-trip exact. The basis for config hashing and manifest records.
std::string canonical_lines(const RunConfig& config);

// FNV-1a over the canonical lines minus run.workers, which must not affect
// artifact bytes.
uint64_t config_hash(const RunConfig& config);

verifier::UnparseablePolicy parse_policy(const std::string& name);

}  // namespace dyve::config
