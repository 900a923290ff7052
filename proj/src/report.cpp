#include "reflect/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "reflect/session.hpp"

namespace reflect {
namespace {

double sorted_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt::format("{:.4f}", *v) : ""; }

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

bool in_overall(TaskId task) { return task != TaskId::mbt; }

Aggregate aggregate(std::span<const TaskScore> scores) {
  std::map<TaskId, std::vector<double>> by_task;
  for (const auto& s : scores) by_task[s.task].push_back(s.score);
  Aggregate a;
  std::vector<double> included;
  for (auto task : kAllTasks) {
    auto it = by_task.find(task);
    if (it == by_task.end()) {
      if (in_overall(task)) a.partial = true;
      continue;
    }
    const double m = sorted_mean(it->second);
    a.task_means[task] = m;
    a.sessions[task] = static_cast<int>(it->second.size());
    if (in_overall(task)) {
      included.push_back(m);
    } else {
      a.mbt = m;
    }
  }
  if (!included.empty()) a.overall = sorted_mean(included);
  return a;
}

SuiteReport build_report(const std::filesystem::path& dir, const ReportOptions& opt) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ValidationError(fmt::format("{} is not a directory", dir.string()));
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError(fmt::format("no transcripts (*.jsonl) in {}", dir.string()));

  struct Group {
    Section section;
    std::vector<TaskScore> scores;
    std::map<TaskId, TaskConfig> configs;
  };
  std::map<std::string, Group> groups;
  SuiteReport report;

  for (const auto& path : files) {
    SessionRow row;
    row.file = path.filename().string();
    Transcript t;
    try {
      t = load_transcript(path);
    } catch (const ValidationError& e) {
      row.status = "invalid";
      row.error = e.what();
      ++report.invalid;
      report.rows.push_back(std::move(row));
      continue;
    }
    const std::string key = fmt::format("{}/{}/{}", to_string(t.config.difficulty), to_string(t.strategy), t.agent);
    row.section = key;
    row.task = t.task;
    row.session_id = t.session_id;
    if (t.score) row.stored_score = t.score->score;

    if (t.status == SessionStatus::aborted) {
      row.status = "aborted";
      row.error = t.error;
      ++report.aborted;
      report.rows.push_back(std::move(row));
      continue;
    }
    try {
      const TaskScore s = replay(t);
      row.status = "completed";
      row.score = s.score;
      row.metrics = s.metrics;
      row.behavior = s.behavior;
      row.mismatch = !row.stored_score || std::abs(*row.stored_score - s.score) > 1e-9;
      auto& g = groups[key];
      if (g.scores.empty()) {
        g.section.difficulty = t.config.difficulty;
        g.section.strategy = t.strategy;
        g.section.agent = t.agent;
        g.section.key = key;
      }
      g.scores.push_back(s);
      g.configs.emplace(t.task, t.config);
    } catch (const ValidationError& e) {
      row.status = "invalid";
      row.error = e.what();
      row.mismatch = true;
      ++report.invalid;
    }
    if (row.mismatch) ++report.mismatches;
    report.rows.push_back(std::move(row));
  }

  // The same config gets the same chance estimate in every section.
  std::map<std::string, ChanceEstimate> chance_cache;
  for (auto& [key, g] : groups) {
    const Aggregate agg = aggregate(g.scores);
    g.section.overall = agg.overall;
    g.section.partial = agg.partial;
    g.section.mbt_anticipation = agg.mbt;
    for (const auto& [task, mean] : agg.task_means) {
      TaskSummary ts;
      ts.task = task;
      ts.mean = mean;
      ts.sessions = agg.sessions.at(task);
      if (task != TaskId::oddball && task != TaskId::mbt) {
        const auto& cfg = g.configs.at(task);
        for (const auto& policy : chance_policies(task)) {
          if (!is_chance_policy(task, policy)) continue;
          const auto ck = to_json(cfg).dump() + "|" + policy;
          auto it = chance_cache.find(ck);
          if (it == chance_cache.end()) {
            it = chance_cache.emplace(ck, estimate_chance(cfg, policy, opt.chance_sims, opt.chance_seed, opt.workers)).first;
          }
          ts.chance.push_back(it->second);
          ts.threshold = std::max(ts.threshold.value_or(it->second.p95), it->second.p95);
        }
        if (ts.threshold) ts.above_chance = ts.mean > *ts.threshold;
      }
      g.section.tasks.push_back(std::move(ts));
    }
    report.sections.push_back(std::move(g.section));
  }
  return report;
}

std::string report_csv(const SuiteReport& r) {
  std::ostringstream out;
  out << "section,task,session_id,file,status,score,stored_score,score_mismatch,error\n";
  for (const auto& row : r.rows) {
    out << csv_field(row.section) << ',' << (row.status == "invalid" && row.section.empty() ? "" : std::string(to_string(row.task)))
        << ',' << csv_field(row.session_id) << ',' << csv_field(row.file) << ',' << row.status << ','
        << fmt_opt(row.score) << ',' << fmt_opt(row.stored_score) << ',' << (row.mismatch ? 1 : 0) << ','
        << csv_field(row.error) << '\n';
  }
  return out.str();
}

nlohmann::json report_json(const SuiteReport& r) {
  using nlohmann::json;
  json sections = json::array();
  for (const auto& s : r.sections) {
    json tasks = json::object();
    for (const auto& t : s.tasks) {
      json chance = json::array();
      for (const auto& c : t.chance) chance.push_back(to_json(c));
      json jt = {{"sessions", t.sessions}, {"mean", t.mean}, {"chance", chance},
                 {"chance_threshold", opt_json(t.threshold)}};
      jt["above_chance"] = t.above_chance ? json(*t.above_chance) : json(nullptr);
      if (t.task == TaskId::mbt) jt["note"] = "anticipation score; excluded from the overall mean";
      tasks[std::string(to_string(t.task))] = jt;
    }
    sections.push_back({{"section", s.key},
                        {"difficulty", to_string(s.difficulty)},
                        {"strategy", to_string(s.strategy)},
                        {"agent", s.agent},
                        {"tasks", tasks},
                        {"overall", opt_json(s.overall)},
                        {"overall_partial", s.partial},
                        {"mbt_anticipation", opt_json(s.mbt_anticipation)}});
  }
  json sessions = json::array();
  for (const auto& row : r.rows) {
    json j = {{"file", row.file},     {"section", row.section},         {"session_id", row.session_id},
              {"status", row.status}, {"score", opt_json(row.score)},   {"stored_score", opt_json(row.stored_score)},
              {"score_mismatch", row.mismatch}};
    if (!row.section.empty()) j["task"] = to_string(row.task);
    if (!row.error.empty()) j["error"] = row.error;
    if (row.status == "completed") {
      j["metrics"] = row.metrics;
      j["behavior"] = row.behavior;
    }
    sessions.push_back(std::move(j));
  }
  return {{"sections", sections},
          {"sessions", sessions},
          {"counts", {{"mismatches", r.mismatches}, {"aborted", r.aborted}, {"invalid", r.invalid}}},
          {"reference", reference_values()}};
}

void write_report(const SuiteReport& r, const std::filesystem::path& dir) {
  {
    std::ofstream csv(dir / "report.csv", std::ios::binary | std::ios::trunc);
    csv << report_csv(r);
  }
  std::ofstream js(dir / "report.json", std::ios::binary | std::ios::trunc);
  js << report_json(r).dump(2) << '\n';
}

nlohmann::json reference_values() {
  return {
      {"note", "published values under the original authors' unpublished policies and models; "
               "reference only, not reproduced here"},
      {"chance_easy",
       {{"wpt", {{"mean", 51.84}, {"p95", 69.95}}},
        {"wcst", {{"mean", 61.80}, {"p95", 66.67}}},
        {"nback", {{"mean", 48.07}, {"p95", 59.62}}},
        {"dcigt", {{"mean", 2.51}, {"p95", 16.48}}},
        {"prlt", {{"mean", 56.47}, {"p95", 67.87}}},
        {"overall", 40.95}}},
      {"oddball_automated_vs_human_r", 0.87},
  };
}

}  // namespace reflect
