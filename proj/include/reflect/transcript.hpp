#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "reflect/config.hpp"
#include "reflect/types.hpp"

namespace reflect {

enum class Role { system, user, assistant };

struct ChatMessage {
  Role role = Role::user;
  std::string content;
};

std::string_view to_string(Role role);

struct TrialRecord {
  int index = 0;  // 1-based, consecutive
  std::string prompt;
  std::string raw_response;
  std::optional<std::string> parsed_action;  // absent iff !valid
  std::string action;                         // applied: parsed or fallback
  std::string feedback;
  bool valid = false;
  int retries_used = 0;
  // Environment facts needed for scoring (weather outcome, rule in force,
  // revealed loss...). Written after the step, never shown to the agent.
  nlohmann::json outcome = nlohmann::json::object();
  // Agent telemetry (latency, token usage, transport attempts). Omitted
  // from the file when empty.
  nlohmann::json meta = nlohmann::json::object();
};

struct TaskScore {
  TaskId task = TaskId::wpt;
  double score = 0.0;  // 0..100
  nlohmann::json metrics = nlohmann::json::object();
  nlohmann::json behavior = nlohmann::json::object();
};

nlohmann::json to_json(const TaskScore& score);
TaskScore score_from_json(TaskId task, const nlohmann::json& j);

enum class SessionStatus { completed, aborted };

struct Transcript {
  std::string session_id;
  TaskId task = TaskId::wpt;
  Strategy strategy = Strategy::free;
  std::uint64_t seed = 0;
  std::string agent;
  std::string system_prompt;
  int max_retries = 1;
  TaskConfig config;
  std::vector<TrialRecord> records;
  SessionStatus status = SessionStatus::completed;
  std::string error;
  std::optional<TaskScore> score;
};

// `<task>_<strategy>_<session_id>.jsonl`
std::string transcript_file_name(const Transcript& t);

// One header line (config snapshot), one line per record, one summary line.
void write_jsonl(const Transcript& t, std::ostream& out);
Transcript read_jsonl(std::istream& in);
void save_transcript(const Transcript& t, const std::filesystem::path& path);
Transcript load_transcript(const std::filesystem::path& path);

// Outcome field of a record; throws ValidationError naming the record when
// the field is missing.
const nlohmann::json& outcome_at(const TrialRecord& record, std::string_view key);

// Structural checks: consecutive indices from 1, parsed_action present iff
// valid, retries within budget, record count matching the config for
// completed sessions. Throws ValidationError naming the first bad record.
void validate_structure(const Transcript& t);

}  // namespace reflect
