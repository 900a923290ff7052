#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "reflect/chance.hpp"
#include "reflect/transcript.hpp"

namespace reflect {

// Tasks that enter the overall mean (everything but MBT).
bool in_overall(TaskId task);

struct Aggregate {
  std::map<TaskId, double> task_means;
  std::map<TaskId, int> sessions;
  std::optional<double> overall;  // mean of the non-MBT task means present
  bool partial = false;           // some non-MBT task had no session
  std::optional<double> mbt;      // reported separately
};

// Per-task means over sessions and the unweighted overall mean. Sums run
// over sorted values so the result does not depend on input order.
Aggregate aggregate(std::span<const TaskScore> scores);

struct SessionRow {
  std::string file;
  std::string section;
  TaskId task = TaskId::wpt;
  std::string session_id;
  std::string status;  // completed, aborted, invalid
  std::optional<double> score;         // from replay
  std::optional<double> stored_score;  // as written by the run
  bool mismatch = false;               // stored score disagrees with replay
  std::string error;
  nlohmann::json metrics;
  nlohmann::json behavior;
};

struct TaskSummary {
  TaskId task = TaskId::wpt;
  int sessions = 0;
  double mean = 0.0;
  std::vector<ChanceEstimate> chance;  // published random policies
  std::optional<double> threshold;     // largest chance p95
  std::optional<bool> above_chance;
};

struct Section {
  Difficulty difficulty = Difficulty::easy;
  Strategy strategy = Strategy::free;
  std::string agent;
  std::string key;  // "<difficulty>/<strategy>/<agent>"
  std::vector<TaskSummary> tasks;
  std::optional<double> overall;
  bool partial = false;
  std::optional<double> mbt_anticipation;
};

struct SuiteReport {
  std::vector<Section> sections;
  std::vector<SessionRow> rows;
  int mismatches = 0;
  int aborted = 0;
  int invalid = 0;
};

struct ReportOptions {
  int chance_sims = 100000;
  std::uint64_t chance_seed = 20240601;
  int workers = 0;
};

// Reads every *.jsonl transcript in `dir`, re-scores each one by replay,
// groups sessions by (difficulty, strategy, agent), and attaches chance
// thresholds. Throws ValidationError when the directory holds no
// transcripts.
SuiteReport build_report(const std::filesystem::path& dir, const ReportOptions& options = {});

// report.csv (one row per session) and report.json.
void write_report(const SuiteReport& report, const std::filesystem::path& dir);
std::string report_csv(const SuiteReport& report);
nlohmann::json report_json(const SuiteReport& report);

// Published reference numbers carried in the report footer; none of them is
// reproduced by this harness.
nlohmann::json reference_values();

}  // namespace reflect
