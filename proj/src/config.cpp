#include "dyve/config.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "dyve/errors.hpp"
#include "dyve/jsonl.hpp"
#include "dyve/rng.hpp"

namespace dyve::config {

namespace {

struct RawValue {
  std::string text;
  bool quoted = false;
  int line = 0;
};

using Setter = std::function<void(RunConfig&, const RawValue&)>;

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
  std::ostringstream message;
  message << source << ":" << line << ": " << what;
  throw config_error(message.str());
}

std::string trim(const std::string& text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

// Drops a '#' comment unless it sits inside a double-quoted string.
std::string strip_comment(const std::string& text) {
  bool in_string = false;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '"' && (i == 0 || text[i - 1] != '\\')) {
      in_string = !in_string;
    } else if (c == '#' && !in_string) {
      return text.substr(0, i);
    }
  }
  return text;
}

long long parse_int(const std::string& source, const RawValue& value, const char* key) {
  if (value.quoted) fail(source, value.line, std::string(key) + " must be an integer");
  try {
    size_t used = 0;
    const long long parsed = std::stoll(value.text, &used);
    if (used != value.text.size()) throw std::invalid_argument(value.text);
    return parsed;
  } catch (const std::exception&) {
    fail(source, value.line, std::string(key) + ": not an integer: " + value.text);
  }
}

uint64_t parse_uint64(const std::string& source, const RawValue& value, const char* key) {
  if (value.quoted || value.text.empty() || value.text[0] == '-') {
    fail(source, value.line, std::string(key) + " must be a non-negative integer");
  }
  try {
    size_t used = 0;
    const unsigned long long parsed = std::stoull(value.text, &used);
    if (used != value.text.size()) throw std::invalid_argument(value.text);
    return parsed;
  } catch (const std::exception&) {
    fail(source, value.line, std::string(key) + ": not an integer: " + value.text);
  }
}

double parse_double(const std::string& source, const RawValue& value, const char* key) {
  if (value.quoted) fail(source, value.line, std::string(key) + " must be a number");
  try {
    size_t used = 0;
    const double parsed = std::stod(value.text, &used);
    if (used != value.text.size()) throw std::invalid_argument(value.text);
    return parsed;
  } catch (const std::exception&) {
    fail(source, value.line, std::string(key) + ": not a number: " + value.text);
  }
}

std::string parse_string(const std::string& source, const RawValue& value, const char* key) {
  if (!value.quoted) {
    fail(source, value.line, std::string(key) + " must be a double-quoted string");
  }
  return value.text;
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto int_field = [](int RunConfig::* field, const char* key) {
      return [field, key](RunConfig& c, const RawValue& v) {
        c.*field = static_cast<int>(parse_int("config", v, key));
      };
    };
    auto double_field = [](double RunConfig::* field, const char* key) {
      return [field, key](RunConfig& c, const RawValue& v) {
        c.*field = parse_double("config", v, key);
      };
    };
    auto string_field = [](std::string RunConfig::* field, const char* key) {
      return [field, key](RunConfig& c, const RawValue& v) {
        c.*field = parse_string("config", v, key);
      };
    };
    auto tree_field = [](double rollout::TreeConfig::* field, const char* key) {
      return [field, key](RunConfig& c, const RawValue& v) {
        c.tree.*field = parse_double("config", v, key);
      };
    };
    auto tree_int_field = [](int rollout::TreeConfig::* field, const char* key) {
      return [field, key](RunConfig& c, const RawValue& v) {
        c.tree.*field = static_cast<int>(parse_int("config", v, key));
      };
    };

    t["run.seed"] = [](RunConfig& c, const RawValue& v) {
      c.seed = parse_uint64("config", v, "run.seed");
      c.has_seed = true;
    };
    t["run.workers"] = int_field(&RunConfig::workers, "run.workers");

    t["backend.kind"] = string_field(&RunConfig::backend_kind, "backend.kind");
    t["backend.base_url"] = string_field(&RunConfig::base_url, "backend.base_url");
    t["backend.model"] = string_field(&RunConfig::model, "backend.model");
    t["backend.virtual_cost"] = double_field(&RunConfig::virtual_cost, "backend.virtual_cost");
    t["backend.max_attempts"] = int_field(&RunConfig::max_attempts, "backend.max_attempts");
    t["backend.backoff_ms"] = int_field(&RunConfig::backoff_ms, "backend.backoff_ms");
    t["backend.timeout_seconds"] =
        int_field(&RunConfig::timeout_seconds, "backend.timeout_seconds");
    t["backend.max_in_flight"] = int_field(&RunConfig::max_in_flight, "backend.max_in_flight");

    t["synth.count"] = int_field(&RunConfig::synth_count, "synth.count");
    t["synth.chain_length"] = int_field(&RunConfig::synth_chain_length, "synth.chain_length");
    t["synth.error_rate"] = double_field(&RunConfig::synth_error_rate, "synth.error_rate");

    t["tree.c_puct"] = tree_field(&rollout::TreeConfig::c_puct, "tree.c_puct");
    t["tree.mc_samples"] = tree_int_field(&rollout::TreeConfig::mc_samples, "tree.mc_samples");
    t["tree.rollouts_per_query"] =
        tree_int_field(&rollout::TreeConfig::rollouts_per_query, "tree.rollouts_per_query");
    t["tree.search_limit"] =
        tree_int_field(&rollout::TreeConfig::search_limit, "tree.search_limit");
    t["tree.alpha"] = tree_field(&rollout::TreeConfig::alpha, "tree.alpha");
    t["tree.beta"] = tree_field(&rollout::TreeConfig::beta, "tree.beta");
    t["tree.length_scale"] = tree_field(&rollout::TreeConfig::length_scale, "tree.length_scale");
    t["tree.completion_error_rate"] =
        double_field(&RunConfig::completion_error_rate, "tree.completion_error_rate");

    t["verify.max_tokens"] = int_field(&RunConfig::verify_max_tokens, "verify.max_tokens");
    t["verify.unparseable_policy"] =
        string_field(&RunConfig::unparseable_policy, "verify.unparseable_policy");
    t["verify.temperature"] =
        double_field(&RunConfig::verify_temperature, "verify.temperature");

    t["judge.flip_rate"] = double_field(&RunConfig::judge_flip_rate, "judge.flip_rate");
    t["judge.temperature"] =
        double_field(&RunConfig::judge_temperature, "judge.temperature");

    t["bon.n"] = int_field(&RunConfig::bon_n, "bon.n");
    t["bon.proposer_p"] = double_field(&RunConfig::bon_proposer_p, "bon.proposer_p");
    t["bon.temperature"] = double_field(&RunConfig::bon_temperature, "bon.temperature");
    return t;
  }();
  return table;
}

std::string format_double(double value) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  out << value;
  return out.str();
}

}  // namespace

void RunConfig::validate() const {
  auto reject = [](const std::string& what) { throw config_error("config: " + what); };
  if (workers < 1) reject("run.workers must be >= 1");
  if (backend_kind != "scripted" && backend_kind != "http") {
    reject("backend.kind must be \"scripted\" or \"http\"");
  }
  if (virtual_cost <= 0.0) reject("backend.virtual_cost must be positive");
  if (max_attempts < 1) reject("backend.max_attempts must be >= 1");
  if (backoff_ms < 0) reject("backend.backoff_ms must be >= 0");
  if (timeout_seconds < 1) reject("backend.timeout_seconds must be >= 1");
  if (max_in_flight < 1) reject("backend.max_in_flight must be >= 1");
  if (synth_count < 1) reject("synth.count must be >= 1");
  if (synth_chain_length < 1) reject("synth.chain_length must be >= 1");
  if (synth_error_rate < 0.0 || synth_error_rate > 1.0) {
    reject("synth.error_rate must be in [0, 1]");
  }
  try {
    tree.validate();
  } catch (const std::exception& error) {
    reject(error.what());
  }
  if (completion_error_rate > 1.0) {
    reject("tree.completion_error_rate must be <= 1 (negative = task default)");
  }
  if (verify_max_tokens < 1 || verify_max_tokens > kMaxResponseTokens) {
    reject("verify.max_tokens must be in [1, 8192]");
  }
  parse_policy(unparseable_policy);
  if (verify_temperature < 0.0) reject("verify.temperature must be >= 0");
  if (judge_flip_rate < 0.0 || judge_flip_rate > 1.0) {
    reject("judge.flip_rate must be in [0, 1]");
  }
  if (judge_temperature < 0.0) reject("judge.temperature must be >= 0");
  if (bon_n < 1) reject("bon.n must be >= 1");
  if (bon_proposer_p < 0.0 || bon_proposer_p > 1.0) {
    reject("bon.proposer_p must be in [0, 1]");
  }
  if (bon_temperature < 0.0) reject("bon.temperature must be >= 0");
}

RunConfig parse_config(const std::string& text, const std::string& source_name) {
  RunConfig config;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_number = 0;
  while (std::getline(in, raw)) {
    ++line_number;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(source_name, line_number, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "run" && section != "backend" && section != "synth" &&
          section != "tree" && section != "verify" && section != "judge" &&
          section != "bon") {
        fail(source_name, line_number, "unknown section [" + section + "]");
      }
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(source_name, line_number, "expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value_text = trim(line.substr(eq + 1));
    if (key.empty() || value_text.empty()) {
      fail(source_name, line_number, "expected key = value");
    }
    if (section.empty()) {
      fail(source_name, line_number, "key \"" + key + "\" outside any section");
    }
    RawValue value;
    value.line = line_number;
    if (value_text.front() == '"') {
      if (value_text.size() < 2 || value_text.back() != '"') {
        fail(source_name, line_number, "unterminated string");
      }
      value.quoted = true;
      value.text = value_text.substr(1, value_text.size() - 2);
    } else {
      value.text = value_text;
    }
    const std::string full_key = section + "." + key;
    const auto& table = setters();
    const auto it = table.find(full_key);
    if (it == table.end()) {
      fail(source_name, line_number, "unknown key \"" + full_key + "\"");
    }
    try {
      it->second(config, value);
    } catch (const config_error& error) {
      // Re-anchor the message to the real source file.
      std::string message = error.what();
      const std::string placeholder = "config:";
      if (message.rfind(placeholder, 0) == 0) {
        message = source_name + ":" + message.substr(placeholder.size());
      }
      throw config_error(message);
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  return parse_config(jsonl::read_text_file(path), path);
}

std::string canonical_lines(const RunConfig& config) {
  std::vector<std::string> lines;
  auto add = [&lines](const std::string& key, const std::string& value) {
    lines.push_back(key + "=" + value);
  };
  add("run.seed", std::to_string(config.seed));
  add("run.workers", std::to_string(config.workers));
  add("backend.kind", config.backend_kind);
  add("backend.base_url", config.base_url);
  add("backend.model", config.model);
  add("backend.virtual_cost", format_double(config.virtual_cost));
  add("backend.max_attempts", std::to_string(config.max_attempts));
  add("backend.backoff_ms", std::to_string(config.backoff_ms));
  add("backend.timeout_seconds", std::to_string(config.timeout_seconds));
  add("backend.max_in_flight", std::to_string(config.max_in_flight));
  add("synth.count", std::to_string(config.synth_count));
  add("synth.chain_length", std::to_string(config.synth_chain_length));
  add("synth.error_rate", format_double(config.synth_error_rate));
  add("tree.c_puct", format_double(config.tree.c_puct));
  add("tree.mc_samples", std::to_string(config.tree.mc_samples));
  add("tree.rollouts_per_query", std::to_string(config.tree.rollouts_per_query));
  add("tree.search_limit", std::to_string(config.tree.search_limit));
  add("tree.alpha", format_double(config.tree.alpha));
  add("tree.beta", format_double(config.tree.beta));
  add("tree.length_scale", format_double(config.tree.length_scale));
  add("tree.completion_error_rate", format_double(config.completion_error_rate));
  add("verify.max_tokens", std::to_string(config.verify_max_tokens));
  add("verify.unparseable_policy", config.unparseable_policy);
  add("verify.temperature", format_double(config.verify_temperature));
  add("judge.flip_rate", format_double(config.judge_flip_rate));
  add("judge.temperature", format_double(config.judge_temperature));
  add("bon.n", std::to_string(config.bon_n));
  add("bon.proposer_p", format_double(config.bon_proposer_p));
  add("bon.temperature", format_double(config.bon_temperature));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& line : lines) {
    out += line;
    out += '\n';
  }
  return out;
}

uint64_t config_hash(const RunConfig& config) {
  std::istringstream in(canonical_lines(config));
  std::string line;
  uint64_t hash = 0xcbf29ce484222325ULL;
  while (std::getline(in, line)) {
    if (line.rfind("run.workers=", 0) == 0) continue;
    hash = rng::fnv1a(line + "\n", hash);
  }
  return hash;
}

verifier::UnparseablePolicy parse_policy(const std::string& name) {
  if (name == "incorrect") return verifier::UnparseablePolicy::TreatAsIncorrect;
  if (name == "correct") return verifier::UnparseablePolicy::TreatAsCorrect;
  if (name == "abort") return verifier::UnparseablePolicy::Abort;
  throw config_error("config: verify.unparseable_policy must be \"incorrect\", \"correct\", or \"abort\"");
}

}  // namespace dyve::config
