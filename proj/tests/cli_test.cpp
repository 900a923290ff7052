#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "reflect/cli.hpp"
#include "reflect/remote.hpp"
#include "support.hpp"

using namespace reflect;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run_cli(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
  return files;
}

}  // namespace

TEST_CASE("run writes transcripts and a report") {
  testing::TempDir dir("cli_run");
  const auto r = cli({"run", "--tasks", "prlt", "--agent", "baseline:wsls", "--sessions", "2", "--seed", "7",
                      "--out", dir.path.string(), "--chance-sims", "1000"});
  CHECK(r.code == 0);
  const auto files = tree(dir.path);
  CHECK(files.count("prlt_free_easy-1.jsonl") == 1);
  CHECK(files.count("prlt_free_easy-2.jsonl") == 1);
  CHECK(files.count("report.csv") == 1);
  CHECK(files.count("report.json") == 1);
}

TEST_CASE("runs are byte-identical and report reproduces the run") {
  testing::TempDir a("cli_a"), b("cli_b");
  const std::vector<std::string> base = {"run", "--tasks", "all", "--agent", "baseline:random", "--seed", "11",
                                         "--chance-sims", "1000", "--out"};
  auto args_a = base, args_b = base;
  args_a.push_back(a.path.string());
  args_b.push_back(b.path.string());
  args_b.insert(args_b.end(), {"--parallel", "3"});
  REQUIRE(cli(args_a).code == 0);
  REQUIRE(cli(args_b).code == 0);
  CHECK(tree(a.path) == tree(b.path));
  const auto before = tree(a.path);
  CHECK(cli({"report", a.path.string(), "--chance-sims", "1000"}).code == 0);
  CHECK(tree(a.path) == before);
}

TEST_CASE("hard wcst uses x = 90 in 15-trial blocks") {
  testing::TempDir dir("cli_hard");
  REQUIRE(cli({"run", "--difficulty", "hard", "--tasks", "wcst", "--agent", "baseline:oracle", "--sessions", "1",
               "--out", dir.path.string(), "--chance-sims", "1000"})
              .code == 0);
  const auto t = load_transcript(dir.path / "wcst_free_hard-1.jsonl");
  CHECK(t.records.size() == 90);
  CHECK(t.config.param("x") == 90);
  CHECK(t.records[14].outcome["rule"] == "shape");
  CHECK(t.records[15].outcome["rule"] == "color");
}

TEST_CASE("precedence: flags over config file over preset") {
  testing::TempDir dir("cli_cfg");
  const auto cfg = dir.path / "cfg.json";
  std::ofstream(cfg) << R"({"difficulty": "hard", "sessions": 1, "overrides": {"prlt": {"p": 0.6}}})";
  const auto out = dir.path / "out";
  REQUIRE(cli({"run", "--tasks", "prlt", "--config", cfg.string(), "--out", out.string(), "--chance-sims", "1000"})
              .code == 0);
  auto t = load_transcript(out / "prlt_free_custom-1.jsonl");
  CHECK(t.config.param("p") == 0.6);
  const auto out2 = dir.path / "out2";
  REQUIRE(cli({"run", "--tasks", "prlt", "--config", cfg.string(), "--set", "p=0.65", "--difficulty", "easy",
               "--out", out2.string(), "--chance-sims", "1000"})
              .code == 0);
  t = load_transcript(out2 / "prlt_free_custom-1.jsonl");
  CHECK(t.config.param("p") == 0.65);
}

TEST_CASE("chance command") {
  testing::TempDir dir("cli_chance");
  const auto a = cli({"chance", "--task", "prlt", "--sims", "1000", "--seed", "1", "--out", dir.path.string()});
  const auto b = cli({"chance", "--task", "prlt", "--sims", "1000", "--seed", "1", "--out", dir.path.string()});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(std::filesystem::exists(dir.path / "chance_prlt_easy_uniform.json"));
  const auto n = cli({"chance", "--task", "nback", "--sims", "10000", "--out", ""});
  CHECK(n.code == 0);
  const auto pos = n.out.find("mean=");
  CHECK(std::abs(std::stod(n.out.substr(pos + 5)) - 50.0) < 1.0);
}

TEST_CASE("exit codes") {
  CHECK(cli({"chance", "--task", "oddball"}).code == kExitUsage);
  CHECK(cli({"chance", "--task", "mbt", "--sims", "1000"}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"run", "--agent", "baseline:genius"}).code == kExitUsage);
  CHECK(cli({"run", "--tasks", "chess"}).code == kExitUsage);
  CHECK(cli({"run", "--set", "p=7", "--tasks", "prlt"}).code == kExitUsage);
  testing::TempDir empty("cli_empty");
  CHECK(cli({"report", empty.path.string()}).code == kExitValidation);
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("remote agent without a key is a usage error") {
  unsetenv(kApiKeyVariable);
  const auto r = cli({"run", "--agent", "remote:m", "--endpoint", "http://127.0.0.1:1/v1", "--tasks", "prlt"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find(kApiKeyVariable) != std::string::npos);
}

TEST_CASE("report flags a hand-edited transcript with exit 4") {
  testing::TempDir dir("cli_tamper");
  REQUIRE(cli({"run", "--tasks", "nback", "--agent", "baseline:random", "--sessions", "1", "--out",
               dir.path.string(), "--chance-sims", "1000"})
              .code == 0);
  const auto path = dir.path / "nback_free_easy-1.jsonl";
  auto text = slurp(path);
  const auto pos = text.find("\"raw_response\":\"");
  REQUIRE(pos != std::string::npos);
  const auto start = pos + 16;
  const auto end = text.find('"', start);
  const auto flip = text.substr(start, end - start) == "Yes" ? "No" : "Yes";
  text.replace(start, end - start, flip);
  std::ofstream(path, std::ios::binary | std::ios::trunc) << text;
  const auto r = cli({"report", dir.path.string(), "--chance-sims", "1000"});
  CHECK(r.code == kExitValidation);
  CHECK(slurp(dir.path / "report.csv").find(",1,") != std::string::npos);
}

TEST_CASE("human agent from scripted input matches the scripted transcript") {
  testing::TempDir a("cli_h1"), b("cli_h2");
  REQUIRE(cli({"run", "--tasks", "prlt", "--agent", "baseline:wsls", "--sessions", "1", "--seed", "3", "--out",
               a.path.string(), "--chance-sims", "1000"})
              .code == 0);
  const auto scripted = load_transcript(a.path / "prlt_free_easy-1.jsonl");
  std::string input;
  for (const auto& r : scripted.records) input += r.raw_response + "\n";
  const auto r = cli({"run", "--tasks", "prlt", "--agent", "human", "--sessions", "1", "--seed", "3", "--out",
                      b.path.string(), "--chance-sims", "1000"},
                     input);
  REQUIRE(r.code == 0);
  auto human = load_transcript(b.path / "prlt_free_easy-1.jsonl");
  CHECK(human.agent == "human");
  human.agent = scripted.agent;
  CHECK(testing::dump(human) == testing::dump(scripted));
  CHECK(r.out.find(scripted.records[5].prompt) != std::string::npos);
}

TEST_CASE("human input running out aborts with exit 3") {
  testing::TempDir dir("cli_abort");
  const auto r = cli({"run", "--tasks", "prlt", "--agent", "human", "--sessions", "1", "--out", dir.path.string(),
                      "--chance-sims", "1000"},
                     "left arm\n");
  CHECK(r.code == kExitTransport);
  const auto t = load_transcript(dir.path / "prlt_free_easy-1.jsonl");
  CHECK(t.status == SessionStatus::aborted);
  CHECK(t.records.size() == 1);
}
