#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dyve::jsonl {

// Record mirrors of the on-disk schemas. Line renderers emit keys in the
// documented order and no others; readers tolerate extra keys (and the
// optional "gold" on traces) but validate types, label ranges, and id
// uniqueness, raising io_error with a 1-based line number.

struct TraceRecord {
  std::string id;
  std::string problem;
  std::vector<std::string> steps;
  int label = -1;
  std::optional<std::string> gold;  // accepted on read; never written
};

struct RolloutRecord {
  std::string id;
  std::vector<std::string> steps;
  int label = -1;
  std::map<int, double> mc;  // probed prefix length -> MC estimate
  int calls = 0;
};

struct FilterLine {
  std::string id;
  bool kept = false;
  std::string reason;
};

struct MessageJson {
  std::string role;
  std::string content;
};

struct ResultRecord {
  std::string id;
  int classification = -1;
  std::vector<std::string> generations;
  double seconds = 0.0;
};

struct BonRecord {
  std::string id;
  int n = 0;
  std::string maj_answer;
  std::string rm_answer;
  std::string gold;
  bool maj_correct = false;
  bool rm_correct = false;
};

std::vector<TraceRecord> read_trace_records(const std::string& path);
std::vector<RolloutRecord> read_rollout_records(const std::string& path);
std::vector<FilterLine> read_filter_lines(const std::string& path);
std::vector<ResultRecord> read_result_records(const std::string& path);
std::vector<BonRecord> read_bon_records(const std::string& path);

// One JSON object per call, no trailing newline.
std::string trace_line(const TraceRecord& record);
std::string rollout_line(const RolloutRecord& record);
std::string filter_line(const FilterLine& record);
std::string sft_line(const std::vector<MessageJson>& messages);
std::string result_line(const ResultRecord& record);
std::string bon_line(const BonRecord& record);

// "id" field of every line; empty when the file does not exist.
std::vector<std::string> read_ids(const std::string& path);

bool file_exists(const std::string& path);

// Appends each line plus '\n' in one stream session; io_error on failure.
void append_lines(const std::string& path, const std::vector<std::string>& lines);

// Truncating whole-file write.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// FNV-1a over the file's raw bytes.
uint64_t file_hash(const std::string& path);

}  // namespace dyve::jsonl
