#include "reflect/transcript.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

namespace reflect {

using nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "?";
}

json to_json(const TaskScore& s) {
  return json{{"score", s.score}, {"metrics", s.metrics}, {"behavior", s.behavior}};
}

TaskScore score_from_json(TaskId task, const json& j) {
  TaskScore s;
  s.task = task;
  s.score = j.at("score").get<double>();
  s.metrics = j.value("metrics", json::object());
  s.behavior = j.value("behavior", json::object());
  return s;
}

std::string transcript_file_name(const Transcript& t) {
  return fmt::format("{}_{}_{}.jsonl", to_string(t.task), to_string(t.strategy), t.session_id);
}

void write_jsonl(const Transcript& t, std::ostream& out) {
  json header{{"type", "header"},
              {"session_id", t.session_id},
              {"task", std::string(to_string(t.task))},
              {"strategy", std::string(to_string(t.strategy))},
              {"seed", t.seed},
              {"agent", t.agent},
              {"max_retries", t.max_retries},
              {"system_prompt", t.system_prompt},
              {"config", to_json(t.config)}};
  out << header.dump() << '\n';
  for (const auto& r : t.records) {
    json line{{"type", "trial"},
              {"index", r.index},
              {"prompt", r.prompt},
              {"raw_response", r.raw_response},
              {"parsed_action", r.parsed_action ? json(*r.parsed_action) : json(nullptr)},
              {"action", r.action},
              {"feedback", r.feedback},
              {"valid", r.valid},
              {"retries_used", r.retries_used},
              {"outcome", r.outcome}};
    if (!r.meta.empty()) line["meta"] = r.meta;
    out << line.dump() << '\n';
  }
  json summary{{"type", "summary"},
               {"status", t.status == SessionStatus::completed ? "completed" : "aborted"}};
  if (!t.error.empty()) summary["error"] = t.error;
  if (t.score) summary["score"] = to_json(*t.score);
  out << summary.dump() << '\n';
}

Transcript read_jsonl(std::istream& in) {
  Transcript t;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  bool have_summary = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(fmt::format("line {}: not valid JSON ({})", line_no, e.what()));
    }
    const std::string type = j.value("type", "");
    try {
      if (type == "header") {
        t.session_id = j.at("session_id").get<std::string>();
        t.task = parse_task(j.at("task").get<std::string>());
        t.strategy = parse_strategy(j.at("strategy").get<std::string>());
        t.seed = j.at("seed").get<std::uint64_t>();
        t.agent = j.value("agent", "");
        t.max_retries = j.value("max_retries", 1);
        t.system_prompt = j.value("system_prompt", "");
        t.config = config_from_json(j.at("config"));
        have_header = true;
      } else if (type == "trial") {
        if (!have_header) throw ValidationError("trial record before header", 0);
        TrialRecord r;
        r.index = j.at("index").get<int>();
        r.prompt = j.at("prompt").get<std::string>();
        r.raw_response = j.at("raw_response").get<std::string>();
        if (!j.at("parsed_action").is_null()) r.parsed_action = j.at("parsed_action").get<std::string>();
        r.action = j.at("action").get<std::string>();
        r.feedback = j.at("feedback").get<std::string>();
        r.valid = j.at("valid").get<bool>();
        r.retries_used = j.at("retries_used").get<int>();
        r.outcome = j.value("outcome", json::object());
        r.meta = j.value("meta", json::object());
        t.records.push_back(std::move(r));
      } else if (type == "summary") {
        t.status = j.at("status").get<std::string>() == "completed" ? SessionStatus::completed
                                                                     : SessionStatus::aborted;
        t.error = j.value("error", "");
        if (j.contains("score")) t.score = score_from_json(t.task, j.at("score"));
        have_summary = true;
      } else {
        throw ValidationError(fmt::format("line {}: unknown record type '{}'", line_no, type));
      }
    } catch (const json::exception& e) {
      throw ValidationError(fmt::format("line {}: {}", line_no, e.what()),
                            static_cast<int>(t.records.size()) + 1);
    } catch (const ConfigError& e) {
      throw ValidationError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  if (!have_header) throw ValidationError("transcript has no header record");
  if (!have_summary) {
    t.status = SessionStatus::aborted;
    if (t.error.empty()) t.error = "transcript has no summary record";
  }
  return t;
}

void save_transcript(const Transcript& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_jsonl(t, out);
}

Transcript load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  return read_jsonl(in);
}

const json& outcome_at(const TrialRecord& record, std::string_view key) {
  auto it = record.outcome.find(std::string(key));
  if (it == record.outcome.end()) {
    throw ValidationError(fmt::format("record {}: outcome lacks '{}'", record.index, key),
                          record.index);
  }
  return *it;
}

void validate_structure(const Transcript& t) {
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const auto& r = t.records[i];
    const int expected = static_cast<int>(i) + 1;
    if (r.index != expected) {
      throw ValidationError(
          fmt::format("record {}: index {} breaks the consecutive sequence (expected {})",
                      expected, r.index, expected),
          expected);
    }
    if (r.parsed_action.has_value() != r.valid) {
      throw ValidationError(
          fmt::format("record {}: parsed_action must be present exactly when valid", r.index),
          r.index);
    }
    if (r.retries_used < 0 || r.retries_used > t.max_retries) {
      throw ValidationError(
          fmt::format("record {}: retries_used={} outside [0, {}]", r.index, r.retries_used,
                      t.max_retries),
          r.index);
    }
  }
  if (t.status == SessionStatus::completed) {
    const int want = record_count(t.config);
    if (static_cast<int>(t.records.size()) != want) {
      throw ValidationError(fmt::format("completed transcript has {} records, config requires {}",
                                        t.records.size(), want),
                            static_cast<int>(t.records.size()) + 1);
    }
  }
}

}  // namespace reflect
