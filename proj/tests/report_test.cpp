#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "reflect/report.hpp"
#include "support.hpp"

using namespace reflect;

namespace {

std::vector<TaskScore> scores(std::initializer_list<std::pair<TaskId, double>> xs) {
  std::vector<TaskScore> out;
  for (auto [t, s] : xs) {
    TaskScore ts;
    ts.task = t;
    ts.score = s;
    out.push_back(ts);
  }
  return out;
}

void write_session(const std::filesystem::path& dir, TaskId task, Difficulty diff, const char* agent,
                   std::uint64_t seed, const std::string& id) {
  auto a = make_baseline(agent);
  auto env = make_environment(preset(task, diff), seed);
  SessionOptions opt;
  opt.seed = seed;
  opt.session_id = id;
  const auto t = run_session(*env, *a, opt);
  save_transcript(t, dir / transcript_file_name(t));
}

}  // namespace

TEST_CASE("overall of six tasks at 100 is 100") {
  const auto a = aggregate(scores({{TaskId::wpt, 100}, {TaskId::wcst, 100}, {TaskId::nback, 100},
                                   {TaskId::dcigt, 100}, {TaskId::prlt, 100}, {TaskId::oddball, 100}}));
  CHECK(*a.overall == 100.0);
  CHECK_FALSE(a.partial);
}

TEST_CASE("overall excludes MBT and flags missing tasks") {
  const auto a = aggregate(scores({{TaskId::wpt, 40}, {TaskId::mbt, 100}}));
  CHECK(*a.overall == 40.0);
  CHECK(*a.mbt == 100.0);
  CHECK(a.partial);
  CHECK(a.task_means.at(TaskId::mbt) == 100.0);
}

TEST_CASE("published per-task scores average to about 62.3") {
  const auto a = aggregate(scores({{TaskId::wpt, 43.92}, {TaskId::wcst, 68.75}, {TaskId::nback, 95.19},
                                   {TaskId::dcigt, 61.80}, {TaskId::prlt, 70.66}, {TaskId::oddball, 33.43}}));
  CHECK(*a.overall == doctest::Approx((43.92 + 68.75 + 95.19 + 61.80 + 70.66 + 33.43) / 6));
  CHECK(std::abs(*a.overall - 62.56) < 0.5);
}

TEST_CASE("aggregation is permutation invariant") {
  Rng rng(1);
  std::vector<TaskScore> xs;
  for (int i = 0; i < 60; ++i) {
    TaskScore s;
    s.task = kAllTasks[rng.below(kAllTasks.size())];
    s.score = rng.uniform() * 100;
    xs.push_back(s);
  }
  const auto ref = aggregate(xs);
  for (int k = 0; k < 50; ++k) {
    rng.shuffle(std::span(xs));
    const auto a = aggregate(xs);
    CHECK(a.overall == ref.overall);
    CHECK(a.task_means == ref.task_means);
  }
}

TEST_CASE("report groups by preset and flags tampering") {
  testing::TempDir dir("report");
  write_session(dir.path, TaskId::prlt, Difficulty::easy, "wsls", 1, "easy-1");
  write_session(dir.path, TaskId::prlt, Difficulty::hard, "wsls", 2, "hard-1");
  write_session(dir.path, TaskId::nback, Difficulty::easy, "all_no", 3, "easy-1");
  ReportOptions ro;
  ro.chance_sims = 1000;
  auto r = build_report(dir.path, ro);
  CHECK(r.sections.size() == 3);
  std::vector<std::string> keys;
  for (const auto& s : r.sections) keys.push_back(s.key);
  CHECK(std::find(keys.begin(), keys.end(), "easy/free/wsls") != keys.end());
  CHECK(std::find(keys.begin(), keys.end(), "hard/free/wsls") != keys.end());
  CHECK(r.mismatches == 0);
  for (const auto& s : r.sections)
    for (const auto& t : s.tasks) {
      CHECK(t.threshold.has_value());
      CHECK(t.chance.size() >= 1);
    }
  const auto csv1 = report_csv(r);
  CHECK(csv1 == report_csv(build_report(dir.path, ro)));

  // hand edit: bump the stored score in the summary line
  const auto path = dir.path / "prlt_free_easy-1.jsonl";
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  in.close();
  auto summary = nlohmann::json::parse(lines.back());
  summary["score"]["score"] = summary["score"]["score"].get<double>() + 1.0;
  lines.back() = summary.dump();
  {
    std::ofstream out(path, std::ios::trunc);
    for (const auto& l : lines) out << l << '\n';
  }
  r = build_report(dir.path, ro);
  CHECK(r.mismatches == 1);
  const auto row = std::find_if(r.rows.begin(), r.rows.end(), [](const auto& x) { return x.file == "prlt_free_easy-1.jsonl"; });
  REQUIRE(row != r.rows.end());
  CHECK(row->mismatch);

  // garbage file
  std::ofstream(dir.path / "junk.jsonl") << "not json\n";
  r = build_report(dir.path, ro);
  CHECK(r.invalid == 1);
}

TEST_CASE("empty directory is an error") {
  testing::TempDir dir("empty");
  CHECK_THROWS_AS(build_report(dir.path), ValidationError);
}

TEST_CASE("reference values are carried but marked as reference") {
  const auto ref = reference_values();
  CHECK(ref["oddball_automated_vs_human_r"] == 0.87);
  CHECK(ref["chance_easy"]["overall"] == 40.95);
}
