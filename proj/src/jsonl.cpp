#include "dyve/jsonl.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "dyve/errors.hpp"
#include "dyve/rng.hpp"
#include "json.hpp"

namespace dyve::jsonl {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
  throw io_error(path + ": " + what, line);
}

json parse_line(const std::string& path, int line, const std::string& text) {
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded() || !value.is_object()) {
    fail(path, line, "malformed JSON object");
  }
  return value;
}

std::string require_string(const std::string& path, int line, const json& object,
                           const char* key) {
  auto it = object.find(key);
  if (it == object.end() || !it->is_string()) {
    fail(path, line, std::string("missing or non-string \"") + key + "\"");
  }
  return it->get<std::string>();
}

int require_int(const std::string& path, int line, const json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end() || !it->is_number_integer()) {
    fail(path, line, std::string("missing or non-integer \"") + key + "\"");
  }
  return it->get<int>();
}

bool require_bool(const std::string& path, int line, const json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end() || !it->is_boolean()) {
    fail(path, line, std::string("missing or non-boolean \"") + key + "\"");
  }
  return it->get<bool>();
}

double require_number(const std::string& path, int line, const json& object,
                      const char* key) {
  auto it = object.find(key);
  if (it == object.end() || !it->is_number()) {
    fail(path, line, std::string("missing or non-numeric \"") + key + "\"");
  }
  return it->get<double>();
}

std::vector<std::string> require_string_array(const std::string& path, int line,
                                              const json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end() || !it->is_array()) {
    fail(path, line, std::string("missing or non-array \"") + key + "\"");
  }
  std::vector<std::string> out;
  out.reserve(it->size());
  for (const auto& element : *it) {
    if (!element.is_string()) {
      fail(path, line, std::string("non-string element in \"") + key + "\"");
    }
    out.push_back(element.get<std::string>());
  }
  return out;
}

// Streams non-empty lines through `consume(line_number, text)`. A single
// trailing blank line (the usual final newline) is tolerated; blank lines
// elsewhere are malformed records.
template <typename Fn>
void for_each_line(const std::string& path, Fn&& consume) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("cannot open " + path + " for reading");
  }
  std::string text;
  int line = 0;
  bool saw_blank = false;
  int blank_line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) {
      saw_blank = true;
      blank_line = line;
      continue;
    }
    if (saw_blank) {
      fail(path, blank_line, "blank line inside JSONL stream");
    }
    consume(line, text);
  }
  if (in.bad()) {
    throw io_error("read failure on " + path);
  }
}

void note_id(const std::string& path, int line, std::set<std::string>& seen,
             const std::string& id) {
  if (!seen.insert(id).second) {
    fail(path, line, "duplicate id \"" + id + "\"");
  }
}

void check_label_range(const std::string& path, int line, int label, size_t step_count) {
  const bool ok = label == -1 || (label >= 0 && static_cast<size_t>(label) < step_count);
  if (!ok) {
    std::ostringstream message;
    message << "label " << label << " out of range for " << step_count << " steps";
    fail(path, line, message.str());
  }
}

}  // namespace

std::vector<TraceRecord> read_trace_records(const std::string& path) {
  std::vector<TraceRecord> records;
  std::set<std::string> seen;
  for_each_line(path, [&](int line, const std::string& text) {
    const json object = parse_line(path, line, text);
    TraceRecord record;
    record.id = require_string(path, line, object, "id");
    note_id(path, line, seen, record.id);
    record.problem = require_string(path, line, object, "problem");
    record.steps = require_string_array(path, line, object, "steps");
    record.label = require_int(path, line, object, "label");
    check_label_range(path, line, record.label, record.steps.size());
    if (auto it = object.find("gold"); it != object.end()) {
      if (!it->is_string()) {
        fail(path, line, "non-string \"gold\"");
      }
      record.gold = it->get<std::string>();
    }
    records.push_back(std::move(record));
  });
  return records;
}

std::vector<RolloutRecord> read_rollout_records(const std::string& path) {
  std::vector<RolloutRecord> records;
  std::set<std::string> seen;
  for_each_line(path, [&](int line, const std::string& text) {
    const json object = parse_line(path, line, text);
    RolloutRecord record;
    record.id = require_string(path, line, object, "id");
    note_id(path, line, seen, record.id);
    record.steps = require_string_array(path, line, object, "steps");
    record.label = require_int(path, line, object, "label");
    check_label_range(path, line, record.label, record.steps.size());
    auto mc_it = object.find("mc");
    if (mc_it == object.end() || !mc_it->is_object()) {
      fail(path, line, "missing or non-object \"mc\"");
    }
    for (const auto& [key, value] : mc_it->items()) {
      if (!value.is_number()) {
        fail(path, line, "non-numeric MC estimate for prefix \"" + key + "\"");
      }
      int prefix_len = 0;
      try {
        size_t used = 0;
        prefix_len = std::stoi(key, &used);
        if (used != key.size()) {
          throw std::invalid_argument(key);
        }
      } catch (const std::exception&) {
        fail(path, line, "non-integer MC prefix key \"" + key + "\"");
      }
      record.mc[prefix_len] = value.get<double>();
    }
    record.calls = require_int(path, line, object, "calls");
    records.push_back(std::move(record));
  });
  return records;
}

std::vector<FilterLine> read_filter_lines(const std::string& path) {
  std::vector<FilterLine> records;
  std::set<std::string> seen;
  for_each_line(path, [&](int line, const std::string& text) {
    const json object = parse_line(path, line, text);
    FilterLine record;
    record.id = require_string(path, line, object, "id");
    note_id(path, line, seen, record.id);
    record.kept = require_bool(path, line, object, "kept");
    record.reason = require_string(path, line, object, "reason");
    if (record.reason != "agree" && record.reason != "disagree" &&
        record.reason != "judge_error") {
      fail(path, line, "unknown filter reason \"" + record.reason + "\"");
    }
    records.push_back(std::move(record));
  });
  return records;
}

std::vector<ResultRecord> read_result_records(const std::string& path) {
  std::vector<ResultRecord> records;
  std::set<std::string> seen;
  for_each_line(path, [&](int line, const std::string& text) {
    const json object = parse_line(path, line, text);
    ResultRecord record;
    record.id = require_string(path, line, object, "id");
    note_id(path, line, seen, record.id);
    record.classification = require_int(path, line, object, "classification");
    if (record.classification < -1) {
      fail(path, line, "classification below -1");
    }
    record.generations = require_string_array(path, line, object, "generations");
    record.seconds = require_number(path, line, object, "seconds");
    records.push_back(std::move(record));
  });
  return records;
}

std::vector<BonRecord> read_bon_records(const std::string& path) {
  std::vector<BonRecord> records;
  std::set<std::string> seen;
  for_each_line(path, [&](int line, const std::string& text) {
    const json object = parse_line(path, line, text);
    BonRecord record;
    record.id = require_string(path, line, object, "id");
    note_id(path, line, seen, record.id);
    record.n = require_int(path, line, object, "n");
    record.maj_answer = require_string(path, line, object, "maj_answer");
    record.rm_answer = require_string(path, line, object, "rm_answer");
    record.gold = require_string(path, line, object, "gold");
    record.maj_correct = require_bool(path, line, object, "maj_correct");
    record.rm_correct = require_bool(path, line, object, "rm_correct");
    records.push_back(std::move(record));
  });
  return records;
}

std::string trace_line(const TraceRecord& record) {
  ordered_json object;
  object["id"] = record.id;
  object["problem"] = record.problem;
  object["steps"] = record.steps;
  object["label"] = record.label;
  return object.dump();
}

std::string rollout_line(const RolloutRecord& record) {
  ordered_json object;
  object["id"] = record.id;
  object["steps"] = record.steps;
  object["label"] = record.label;
  ordered_json mc = ordered_json::object();
  for (const auto& [prefix_len, estimate] : record.mc) {
    mc[std::to_string(prefix_len)] = estimate;
  }
  object["mc"] = std::move(mc);
  object["calls"] = record.calls;
  return object.dump();
}

std::string filter_line(const FilterLine& record) {
  ordered_json object;
  object["id"] = record.id;
  object["kept"] = record.kept;
  object["reason"] = record.reason;
  return object.dump();
}

std::string sft_line(const std::vector<MessageJson>& messages) {
  ordered_json list = ordered_json::array();
  for (const auto& message : messages) {
    ordered_json entry;
    entry["role"] = message.role;
    entry["content"] = message.content;
    list.push_back(std::move(entry));
  }
  ordered_json object;
  object["messages"] = std::move(list);
  return object.dump();
}

std::string result_line(const ResultRecord& record) {
  ordered_json object;
  object["id"] = record.id;
  object["classification"] = record.classification;
  object["generations"] = record.generations;
  object["seconds"] = record.seconds;
  return object.dump();
}

std::string bon_line(const BonRecord& record) {
  ordered_json object;
  object["id"] = record.id;
  object["n"] = record.n;
  object["maj_answer"] = record.maj_answer;
  object["rm_answer"] = record.rm_answer;
  object["gold"] = record.gold;
  object["maj_correct"] = record.maj_correct;
  object["rm_correct"] = record.rm_correct;
  return object.dump();
}

std::vector<std::string> read_ids(const std::string& path) {
  std::vector<std::string> ids;
  if (!file_exists(path)) {
    return ids;
  }
  for_each_line(path, [&](int line, const std::string& text) {
    const json object = parse_line(path, line, text);
    ids.push_back(require_string(path, line, object, "id"));
  });
  return ids;
}

bool file_exists(const std::string& path) {
  std::error_code ec;
  return std::filesystem::exists(path, ec) && !ec;
}

void append_lines(const std::string& path, const std::vector<std::string>& lines) {
  if (lines.empty()) {
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) {
    throw io_error("cannot open " + path + " for appending");
  }
  for (const auto& line : lines) {
    out << line << '\n';
  }
  out.flush();
  if (!out) {
    throw io_error("write failure on " + path);
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw io_error("cannot open " + path + " for writing");
  }
  out << content;
  out.flush();
  if (!out) {
    throw io_error("write failure on " + path);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("cannot open " + path + " for reading");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw io_error("read failure on " + path);
  }
  return buffer.str();
}

uint64_t file_hash(const std::string& path) {
  return rng::fnv1a(read_text_file(path));
}

}  // namespace dyve::jsonl
