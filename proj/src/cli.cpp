#include "dyve/cli.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dyve/config.hpp"
#include "dyve/errors.hpp"
#include "dyve/evalharness.hpp"
#include "dyve/http_backend.hpp"
#include "dyve/jsonl.hpp"
#include "dyve/rng.hpp"
#include "dyve/rollout.hpp"
#include "dyve/selection.hpp"
#include "dyve/supervision.hpp"
#include "dyve/synth.hpp"
#include "dyve/verifier.hpp"
#include "dyve/worker_pool.hpp"

namespace dyve::cli {

namespace {

// Each stage draws its randomness from an independent stream of the run seed,
// so adding a stage never disturbs the others.
constexpr uint64_t kSynthSalt = 0xd15e0001ULL;
constexpr uint64_t kRolloutSalt = 0xd15e0002ULL;
constexpr uint64_t kJudgeSalt = 0xd15e0003ULL;
constexpr uint64_t kRebalanceSalt = 0xd15e0004ULL;
constexpr uint64_t kVerifySalt = 0xd15e0005ULL;
constexpr uint64_t kBonSalt = 0xd15e0006ULL;

struct StageOptions {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<int> workers;
  std::string out;
  std::string queries;
  std::string rollouts;
  std::string cases;
  std::string problems;
  std::string report;
};

config::RunConfig resolve_config(const StageOptions& options) {
  config::RunConfig cfg;
  if (!options.config_path.empty()) {
    cfg = config::load_config(options.config_path);
  }
  if (options.seed) {
    cfg.seed = *options.seed;
    cfg.has_seed = true;
  }
  if (options.workers) {
    cfg.workers = *options.workers;
  }
  cfg.validate();
  if (!cfg.has_seed) {
    throw config_error("a run seed is required: set [run] seed or pass --seed");
  }
  return cfg;
}

std::shared_ptr<Backend> make_backend(const config::RunConfig& cfg) {
  if (cfg.backend_kind == "http") {
    HttpBackendConfig http;
    http.base_url = cfg.base_url;  // empty falls back to DYVE_API_BASE
    http.model = cfg.model;
    http.max_attempts = cfg.max_attempts;
    http.backoff_base_ms = cfg.backoff_ms;
    http.timeout_seconds = cfg.timeout_seconds;
    http.max_in_flight = cfg.max_in_flight;
    return std::make_shared<HttpBackend>(http);
  }
  return std::make_shared<synth::ScriptedBackend>(cfg.virtual_cost);
}

std::unique_ptr<Judge> make_judge(const config::RunConfig& cfg,
                                  const std::shared_ptr<Backend>& backend) {
  if (cfg.backend_kind == "http") {
    return std::make_unique<BackendJudge>(backend, cfg.judge_temperature,
                                          rng::derive_seed(cfg.seed, kJudgeSalt));
  }
  return std::make_unique<synth::ScriptedJudge>(cfg.judge_flip_rate,
                                                rng::derive_seed(cfg.seed, kJudgeSalt));
}

std::unique_ptr<Completer> make_completer(const config::RunConfig& cfg,
                                          const std::shared_ptr<Backend>& backend) {
  if (cfg.backend_kind == "http") {
    return std::make_unique<rollout::BackendCompleter>(backend);
  }
  std::optional<double> override_rate;
  if (cfg.completion_error_rate >= 0.0) {
    override_rate = cfg.completion_error_rate;
  }
  return std::make_unique<synth::SynthCompleter>(override_rate);
}

std::unique_ptr<selection::Proposer> make_proposer(const config::RunConfig& cfg,
                                                   const std::shared_ptr<Backend>& backend) {
  if (cfg.backend_kind == "http") {
    return std::make_unique<selection::BackendProposer>(backend, cfg.bon_temperature);
  }
  return std::make_unique<selection::ScriptedProposer>(cfg.bon_proposer_p);
}

verifier::VerifierConfig make_verifier_config(const config::RunConfig& cfg,
                                              std::shared_ptr<Backend> backend) {
  verifier::VerifierConfig vcfg;
  vcfg.backend = std::move(backend);
  vcfg.max_tokens = cfg.verify_max_tokens;
  vcfg.temperature = cfg.verify_temperature;
  vcfg.unparseable_policy = config::parse_policy(cfg.unparseable_policy);
  vcfg.seed = rng::derive_seed(cfg.seed, kVerifySalt);
  return vcfg;
}

std::string hex64(uint64_t value) {
  std::ostringstream out;
  out << std::hex << std::setfill('0') << std::setw(16) << value;
  return out.str();
}

// Sidecar provenance note; *.jsonl artifact bytes never depend on it.
void write_manifest(const std::string& artifact, const std::string& command,
                    const config::RunConfig& cfg, const std::vector<std::string>& inputs) {
  nlohmann::ordered_json doc;
  doc["command"] = command;
  doc["config_hash"] = hex64(config::config_hash(cfg));
  nlohmann::ordered_json input_hashes = nlohmann::ordered_json::object();
  for (const auto& path : inputs) {
    if (!path.empty()) {
      input_hashes[path] = hex64(jsonl::file_hash(path));
    }
  }
  doc["inputs"] = std::move(input_hashes);
  jsonl::write_text_file(artifact + ".manifest.json", doc.dump(2) + "\n");
}

// Rollout record ids are "<query id>#<k>"; this recovers the query id.
std::string query_id_of(const std::string& rollout_id) {
  const size_t pos = rollout_id.rfind('#');
  return pos == std::string::npos ? rollout_id : rollout_id.substr(0, pos);
}

// Tag portion of a synthetic task id ("synth-<seed>-<len>-<permille>-<tag>").
std::string synth_tag_of(const std::string& id) {
  int dashes = 0;
  for (size_t i = 0; i < id.size(); ++i) {
    if (id[i] == '-') {
      ++dashes;
      if (dashes == 4) return id.substr(i + 1);
    }
  }
  return std::string();
}

// Rebuilds the problem a dataset row describes. Synthetic ids carry their
// whole task, so the gold answer can be derived even when the row lacks one.
Problem problem_for_record(const jsonl::TraceRecord& record) {
  Problem problem{record.id, record.problem, record.gold};
  if (!problem.gold_answer) {
    if (const auto spec = synth::spec_from_id(record.id)) {
      problem.gold_answer = std::to_string(synth::make_schedule(*spec).final_value());
    }
  }
  return problem;
}

// Problem for a rollout record: prefer the queries file, fall back to the
// synthetic family encoded in the id.
Problem problem_for_rollout(const std::string& rollout_id,
                            const std::unordered_map<std::string, Problem>& queries) {
  const std::string qid = query_id_of(rollout_id);
  if (const auto it = queries.find(qid); it != queries.end()) {
    return it->second;
  }
  if (const auto spec = synth::spec_from_id(qid)) {
    auto [problem, trace, label] = synth::synth_problem(*spec, synth_tag_of(qid));
    return problem;
  }
  throw io_error("cannot reconstruct the problem for rollout \"" + rollout_id +
                 "\"; pass --queries with the dataset it came from");
}

std::vector<std::string> step_texts(const ReasoningTrace& trace) {
  std::vector<std::string> texts;
  texts.reserve(trace.steps.size());
  for (const Step& step : trace.steps) texts.push_back(step.text);
  return texts;
}

// ============================================================================
// synth
// ============================================================================

int cmd_synth(const StageOptions& options, std::ostream& out) {
  const config::RunConfig cfg = resolve_config(options);
  const uint64_t stage_seed = rng::derive_seed(cfg.seed, kSynthSalt);

  std::set<std::string> existing;
  for (const auto& id : jsonl::read_ids(options.out)) existing.insert(id);

  std::vector<std::string> lines;
  int written = 0;
  for (int k = 0; k < cfg.synth_count; ++k) {
    synth::SynthTaskSpec spec;
    spec.chain_length = cfg.synth_chain_length;
    spec.error_rate = cfg.synth_error_rate;
    spec.seed = rng::derive_seed(stage_seed, static_cast<uint64_t>(k));
    const std::string tag = "q" + std::to_string(k);
    const std::string id = synth::id_from_spec(spec, tag);
    if (existing.count(id) != 0) continue;
    auto [problem, trace, label] = synth::synth_problem(spec, tag);
    jsonl::TraceRecord record;
    record.id = problem.id;
    record.problem = problem.statement;
    record.steps = step_texts(trace);
    record.label = label.value;
    lines.push_back(jsonl::trace_line(record));
    ++written;
  }
  jsonl::append_lines(options.out, lines);
  if (written == 0 && !jsonl::file_exists(options.out)) {
    jsonl::write_text_file(options.out, "");
  }
  write_manifest(options.out, "synth", cfg, {options.config_path});
  out << "synth: " << written << " new of " << cfg.synth_count << " tasks in "
      << options.out << "\n";
  return kExitOk;
}

// ============================================================================
// rollout
// ============================================================================

int cmd_rollout(const StageOptions& options, std::ostream& out) {
  const config::RunConfig cfg = resolve_config(options);
  const uint64_t stage_seed = rng::derive_seed(cfg.seed, kRolloutSalt);
  const auto records = jsonl::read_trace_records(options.queries);

  // Rollouts for one query are appended together, so any record with a
  // query's prefix marks that query complete.
  std::set<std::string> done;
  for (const auto& id : jsonl::read_ids(options.out)) done.insert(query_id_of(id));

  std::vector<size_t> pending;
  for (size_t i = 0; i < records.size(); ++i) {
    if (done.count(records[i].id) == 0) pending.push_back(i);
  }

  const auto completer = make_completer(cfg, make_backend(cfg));
  size_t labeled = 0;

  const size_t chunk = static_cast<size_t>(std::max(1, cfg.workers)) * 4;
  for (size_t begin = 0; begin < pending.size(); begin += chunk) {
    const size_t end = std::min(pending.size(), begin + chunk);
    const std::vector<size_t> slice(pending.begin() + static_cast<long>(begin),
                                    pending.begin() + static_cast<long>(end));
    auto per_query = parallel_map(slice, cfg.workers, [&](size_t index, size_t) {
      const auto& record = records[index];
      const Problem problem = problem_for_record(record);
      const uint64_t query_seed = rng::derive_seed(stage_seed, rng::fnv1a(record.id));
      const auto labels = rollout::generate_rollouts(problem, *completer, cfg.tree, query_seed);
      std::vector<std::string> lines;
      lines.reserve(labels.size());
      for (size_t k = 0; k < labels.size(); ++k) {
        jsonl::RolloutRecord row;
        row.id = record.id + "#" + std::to_string(k);
        row.steps = step_texts(labels[k].trace);
        row.label = labels[k].label.value;
        row.mc = labels[k].mc_at_prefixes;
        row.calls = labels[k].estimator_calls;
        lines.push_back(jsonl::rollout_line(row));
      }
      return lines;
    });
    std::vector<std::string> flat;
    for (auto& lines : per_query) {
      labeled += lines.size();
      for (auto& line : lines) flat.push_back(std::move(line));
    }
    jsonl::append_lines(options.out, flat);
  }
  if (pending.empty() && !jsonl::file_exists(options.out)) {
    jsonl::write_text_file(options.out, "");
  }
  write_manifest(options.out, "rollout", cfg, {options.config_path, options.queries});
  out << "rollout: " << pending.size() << " of " << records.size() << " queries run, "
      << labeled << " rollouts, " << completer->samples_drawn() << " samples in "
      << options.out << "\n";
  return kExitOk;
}

// ============================================================================
// curate
// ============================================================================

int cmd_curate(const StageOptions& options, std::ostream& out) {
  const config::RunConfig cfg = resolve_config(options);
  const auto records = jsonl::read_rollout_records(options.rollouts);

  // The filter report is written last and lists every input id, so a matching
  // report marks the stage complete. Rebalancing is a whole-set operation;
  // anything less than a complete pair of outputs is rebuilt from scratch.
  if (jsonl::file_exists(options.report) && jsonl::file_exists(options.out)) {
    const auto prior = jsonl::read_filter_lines(options.report);
    bool complete = prior.size() == records.size();
    for (size_t i = 0; complete && i < prior.size(); ++i) {
      complete = prior[i].id == records[i].id;
    }
    if (complete) {
      out << "curate: outputs for " << records.size() << " rollouts already complete\n";
      return kExitOk;
    }
  }

  std::unordered_map<std::string, Problem> queries;
  if (!options.queries.empty()) {
    for (const auto& record : jsonl::read_trace_records(options.queries)) {
      queries.emplace(record.id, problem_for_record(record));
    }
  }

  std::vector<supervision::CuratedRollout> rollouts;
  rollouts.reserve(records.size());
  for (const auto& record : records) {
    supervision::CuratedRollout item;
    item.id = record.id;
    item.trace = make_trace(problem_for_rollout(record.id, queries), record.steps);
    item.label = FirstErrorLabel{record.label};
    rollouts.push_back(std::move(item));
  }

  const auto backend = make_backend(cfg);
  const auto judge = make_judge(cfg, backend);
  const auto outcome = supervision::consensus_filter(rollouts, *judge, cfg.workers);

  // Step-level class balance across every kept rollout.
  const auto examples = supervision::step_examples(outcome.kept);
  std::vector<supervision::StepExample> balanced;
  if (!examples.empty()) {
    balanced = supervision::rebalance(examples, rng::derive_seed(cfg.seed, kRebalanceSalt));
  }
  std::unordered_map<std::string, std::unordered_set<int>> selected;
  for (const auto& example : balanced) {
    selected[example.rollout_id].insert(example.step_index);
  }

  // One reasoner conversation per kept rollout with surviving steps; records
  // come back in rollout order, steps in step order, whatever the fan-out.
  auto sft_lines = parallel_map(
      outcome.kept, cfg.workers,
      [&](const supervision::JudgedLabel& judged, size_t) -> std::vector<std::string> {
        const auto it = selected.find(judged.rollout.id);
        if (it == selected.end()) return {};
        const auto flags = supervision::flag_steps(judged, *backend);
        std::vector<std::string> lines;
        supervision::emit_sft_records(
            flags, judged.rollout,
            [&lines](const supervision::SftRecord& record) {
              std::vector<jsonl::MessageJson> messages;
              messages.reserve(record.turns.size());
              for (const auto& turn : record.turns) {
                messages.push_back({role_name(turn.role), turn.content});
              }
              lines.push_back(jsonl::sft_line(messages));
            },
            &it->second);
        return lines;
      });

  std::vector<std::string> flat;
  for (auto& lines : sft_lines) {
    for (auto& line : lines) flat.push_back(std::move(line));
  }
  jsonl::write_text_file(options.out, "");
  jsonl::append_lines(options.out, flat);

  std::vector<std::string> report_lines;
  report_lines.reserve(outcome.report.size());
  for (const auto& decision : outcome.report) {
    report_lines.push_back(jsonl::filter_line(
        {decision.id, decision.kept, supervision::filter_reason_name(decision.reason)}));
  }
  jsonl::write_text_file(options.report, "");
  jsonl::append_lines(options.report, report_lines);

  write_manifest(options.out, "curate", cfg,
                 {options.config_path, options.rollouts, options.queries});
  out << "curate: kept " << outcome.kept.size() << " of " << records.size()
      << " rollouts, " << balanced.size() << " step labels after rebalancing, "
      << flat.size() << " conversations in " << options.out << "\n";
  return kExitOk;
}

// ============================================================================
// verify / eval
// ============================================================================

std::vector<evalharness::CaseResult> load_precomputed(const std::string& path) {
  std::vector<evalharness::CaseResult> results;
  if (!jsonl::file_exists(path)) return results;
  for (const auto& record : jsonl::read_result_records(path)) {
    evalharness::CaseResult result;
    result.id = record.id;
    result.classification = FirstErrorLabel{record.classification};
    result.generations = record.generations;
    result.seconds = record.seconds;
    results.push_back(std::move(result));
  }
  return results;
}

int run_eval_stage(const StageOptions& options, std::ostream& out, bool with_report) {
  const config::RunConfig cfg = resolve_config(options);
  const auto cases = evalharness::load_cases(options.cases);
  const auto vcfg = make_verifier_config(cfg, make_backend(cfg));

  const auto precomputed = load_precomputed(options.out);
  std::unordered_set<std::string> persisted;
  for (const auto& result : precomputed) persisted.insert(result.id);

  std::vector<evalharness::CaseResult> results;
  const auto report = evalharness::evaluate(cases, vcfg, cfg.workers, &results, &precomputed);

  // Failures are not persisted; a rerun retries them.
  std::vector<std::string> lines;
  for (const auto& result : results) {
    if (result.failed || persisted.count(result.id) != 0) continue;
    jsonl::ResultRecord record;
    record.id = result.id;
    record.classification = result.classification.value;
    record.generations = result.generations;
    record.seconds = result.seconds;
    lines.push_back(jsonl::result_line(record));
  }
  jsonl::append_lines(options.out, lines);
  if (lines.empty() && !jsonl::file_exists(options.out)) {
    jsonl::write_text_file(options.out, "");
  }

  if (with_report) {
    nlohmann::ordered_json doc;
    doc["acc_erroneous"] =
        report.acc_erroneous ? nlohmann::ordered_json(*report.acc_erroneous) : nullptr;
    doc["acc_correct"] =
        report.acc_correct ? nlohmann::ordered_json(*report.acc_correct) : nullptr;
    doc["f1"] = report.f1 ? nlohmann::ordered_json(*report.f1) : nullptr;
    doc["mean_seconds"] = report.mean_seconds;
    doc["cases"] = report.total_cases;
    doc["erroneous_cases"] = report.erroneous_cases;
    doc["correct_cases"] = report.correct_cases;
    doc["failures"] = report.failures;
    jsonl::write_text_file(options.report, doc.dump(2) + "\n");
  }

  write_manifest(options.out, with_report ? "eval" : "verify", cfg,
                 {options.config_path, options.cases});
  out << (with_report ? "eval: " : "verify: ") << report.total_cases << " cases, "
      << report.failures << " failures";
  if (report.f1) {
    out << ", f1 " << *report.f1;
  }
  out << ", results in " << options.out << "\n";
  return kExitOk;
}

// ============================================================================
// bon
// ============================================================================

int cmd_bon(const StageOptions& options, std::ostream& out) {
  const config::RunConfig cfg = resolve_config(options);
  const uint64_t stage_seed = rng::derive_seed(cfg.seed, kBonSalt);
  const auto records = jsonl::read_trace_records(options.problems);

  std::set<std::string> existing;
  for (const auto& id : jsonl::read_ids(options.out)) existing.insert(id);

  std::vector<size_t> pending;
  for (size_t i = 0; i < records.size(); ++i) {
    if (existing.count(records[i].id) == 0) pending.push_back(i);
  }

  const auto backend = make_backend(cfg);
  const auto proposer = make_proposer(cfg, backend);
  const auto vcfg = make_verifier_config(cfg, backend);

  auto lines = parallel_map(pending, cfg.workers, [&](size_t index, size_t) {
    const auto& record = records[index];
    const Problem problem = problem_for_record(record);
    if (!problem.gold_answer) {
      throw domain_error("problem \"" + record.id +
                         "\" has no gold answer; Best-of-N needs one to score");
    }
    const auto outcome = selection::best_of_n(problem, *proposer, vcfg, cfg.bon_n,
                                              rng::derive_seed(stage_seed, rng::fnv1a(record.id)));
    jsonl::BonRecord row;
    row.id = record.id;
    row.n = outcome.n;
    row.maj_answer = outcome.maj_answer;
    row.rm_answer = outcome.rm_answer;
    row.gold = selection::normalize_answer(*problem.gold_answer);
    row.maj_correct = outcome.maj_correct;
    row.rm_correct = outcome.rm_correct;
    return jsonl::bon_line(row);
  });
  jsonl::append_lines(options.out, lines);
  if (lines.empty() && !jsonl::file_exists(options.out)) {
    jsonl::write_text_file(options.out, "");
  }

  const auto all = jsonl::read_bon_records(options.out);
  size_t maj_hits = 0;
  size_t rm_hits = 0;
  for (const auto& row : all) {
    maj_hits += row.maj_correct ? 1 : 0;
    rm_hits += row.rm_correct ? 1 : 0;
  }
  write_manifest(options.out, "bon", cfg, {options.config_path, options.problems});
  out << "bon: " << pending.size() << " of " << records.size() << " problems run";
  if (!all.empty()) {
    out << ", maj@" << cfg.bon_n << " "
        << static_cast<double>(maj_hits) / static_cast<double>(all.size()) << ", rm@"
        << cfg.bon_n << " " << static_cast<double>(rm_hits) / static_cast<double>(all.size());
  }
  out << ", results in " << options.out << "\n";
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"process-supervision data pipeline"};
  app.name("dyve");
  app.require_subcommand(1);

  StageOptions options;
  auto add_common = [&options](CLI::App* sub) {
    sub->add_option("--config", options.config_path, "run config file");
    sub->add_option("--seed", options.seed, "run seed (overrides the config)");
    sub->add_option("--workers", options.workers, "worker threads (overrides the config)");
  };

  CLI::App* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic step-annotated dataset");
  add_common(synth_cmd);
  synth_cmd->add_option("--out", options.out, "output dataset JSONL")->required();

  CLI::App* rollout_cmd =
      app.add_subcommand("rollout", "label rollouts for each query by tree search");
  add_common(rollout_cmd);
  rollout_cmd->add_option("--queries", options.queries, "query dataset JSONL")->required();
  rollout_cmd->add_option("--out", options.out, "output rollout JSONL")->required();

  CLI::App* curate_cmd = app.add_subcommand(
      "curate", "filter rollouts by judge consensus and emit training conversations");
  add_common(curate_cmd);
  curate_cmd->add_option("--rollouts", options.rollouts, "rollout JSONL")->required();
  curate_cmd->add_option("--queries", options.queries,
                         "query dataset the rollouts came from (optional)");
  curate_cmd->add_option("--out", options.out, "output conversation JSONL")->required();
  curate_cmd->add_option("--report", options.report, "filter report JSONL")->required();

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "verify traces step by step and record classifications");
  add_common(verify_cmd);
  verify_cmd->add_option("--cases", options.cases, "trace dataset JSONL")->required();
  verify_cmd->add_option("--out", options.out, "output result JSONL")->required();

  CLI::App* eval_cmd =
      app.add_subcommand("eval", "verify a labeled dataset and score the classifications");
  add_common(eval_cmd);
  eval_cmd->add_option("--cases", options.cases, "labeled trace dataset JSONL")->required();
  eval_cmd->add_option("--out", options.out, "output result JSONL")->required();
  eval_cmd->add_option("--report", options.report, "summary report JSON")->required();

  CLI::App* bon_cmd =
      app.add_subcommand("bon", "sample N candidate solutions and select an answer");
  add_common(bon_cmd);
  bon_cmd->add_option("--problems", options.problems, "problem dataset JSONL")->required();
  bon_cmd->add_option("--out", options.out, "output selection JSONL")->required();

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("dyve");
  for (const auto& arg : args) argv_storage.push_back(arg);
  std::vector<char*> argv;
  argv.reserve(argv_storage.size());
  for (auto& arg : argv_storage) argv.push_back(arg.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (app.got_subcommand(synth_cmd)) return cmd_synth(options, out);
    if (app.got_subcommand(rollout_cmd)) return cmd_rollout(options, out);
    if (app.got_subcommand(curate_cmd)) return cmd_curate(options, out);
    if (app.got_subcommand(verify_cmd)) return run_eval_stage(options, out, false);
    if (app.got_subcommand(eval_cmd)) return run_eval_stage(options, out, true);
    if (app.got_subcommand(bon_cmd)) return cmd_bon(options, out);
    err << "error: no command selected\n";
    return kExitConfig;
  } catch (const config_error& error) {
    err << "config error: " << error.what() << "\n";
    return kExitConfig;
  } catch (const io_error& error) {
    err << "I/O error: " << error.what() << "\n";
    return kExitIo;
  } catch (const transport_error& error) {
    err << "backend error: " << error.what() << "\n";
    return kExitBackend;
  } catch (const std::exception& error) {
    err << "error: " << error.what() << "\n";
    return kExitOther;
  }
}

}  // namespace dyve::cli
