#include "reflect/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "reflect/chance.hpp"
#include "reflect/remote.hpp"
#include "reflect/report.hpp"
#include "reflect/session.hpp"

namespace reflect {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<TaskId> parse_task_list(const std::vector<std::string>& names) {
  std::vector<TaskId> tasks;
  for (const auto& n : names) {
    if (n == "all") {
      for (auto t : kAllTasks)
        if (std::find(tasks.begin(), tasks.end(), t) == tasks.end()) tasks.push_back(t);
      continue;
    }
    const auto t = parse_task(n);
    if (std::find(tasks.begin(), tasks.end(), t) == tasks.end()) tasks.push_back(t);
  }
  if (tasks.empty()) throw ConfigError("no tasks selected");
  return tasks;
}

json read_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file {}", path));
  try {
    auto j = json::parse(in);
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config file {}: {}", path, e.what()));
  }
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_array()) {
    std::string out;
    for (const auto& x : v) out += (out.empty() ? "" : ",") + scalar_text(x);
    return out;
  }
  return v.dump();
}

// `key=value` applies to every selected task that knows the key;
// `task.key=value` targets one task.
struct Override {
  std::optional<TaskId> task;
  std::string key;
  std::string value;
};

Override parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(fmt::format("--set expects key=value, got '{}'", text));
  Override o;
  std::string key = text.substr(0, eq);
  o.value = text.substr(eq + 1);
  if (const auto dot = key.find('.'); dot != std::string::npos) {
    o.task = parse_task(key.substr(0, dot));
    key = key.substr(dot + 1);
  }
  o.key = key;
  return o;
}

bool knows_key(const TaskConfig& c, const std::string& key) {
  return key == "trials" || key == "sessions" || key == "seed" || c.params.contains(key) ||
         c.options.contains(key) || (key == "p_loss" && c.task == TaskId::dcigt) ||
         (key == "corpus" && c.task == TaskId::oddball);
}

void apply_overrides(TaskConfig& c, const std::vector<Override>& overrides) {
  for (const auto& o : overrides) {
    if (o.task && *o.task != c.task) continue;
    if (!o.task && !knows_key(c, o.key)) continue;
    if (o.key == "corpus" && c.task == TaskId::oddball) {
      c.options["corpus"] = o.value;
      continue;
    }
    apply_override(c, o.key, o.value);
  }
}

// preset < config file < flags
TaskConfig build_config(TaskId task, Difficulty difficulty, const json& file,
                        const std::vector<Override>& flag_overrides) {
  TaskConfig c = preset(task, difficulty);
  std::vector<Override> from_file;
  if (file.contains("overrides")) {
    for (const auto& [scope, body] : file["overrides"].items()) {
      if (body.is_object()) {
        const auto t = parse_task(scope);
        for (const auto& [k, v] : body.items()) from_file.push_back({t, k, scalar_text(v)});
      } else {
        from_file.push_back({std::nullopt, scope, scalar_text(body)});
      }
    }
  }
  apply_overrides(c, from_file);
  apply_overrides(c, flag_overrides);
  finalize(c);
  validate(c);
  return c;
}

struct RunFlags {
  std::string tasks = "all";
  std::string agent = "baseline:random";
  std::string strategy;
  std::string difficulty;
  std::vector<std::string> sets;
  std::string config;
  int sessions = 0;
  std::optional<std::uint64_t> seed;
  std::string out = "runs";
  int parallel = 1;
  int max_retries = 1;
  std::string endpoint;
  std::string model;
  double rate_limit = 60.0;
  int retry_budget = 3;
  double timeout = 60.0;
  std::string embedder;
  std::string embedding_model = kDefaultEmbeddingModel;
  int chance_sims = 100000;
  std::uint64_t chance_seed = ReportOptions{}.chance_seed;
};

struct ChanceFlags {
  std::string task;
  std::string policy = "uniform";
  int sims = 1000000;
  std::uint64_t seed = 1;
  std::string difficulty = "easy";
  std::vector<std::string> sets;
  std::string config;
  int workers = 0;
  std::string out = ".";
};

struct ReportFlags {
  std::string dir;
  int chance_sims = 100000;
  std::uint64_t chance_seed = ReportOptions{}.chance_seed;
};

struct Job {
  TaskConfig config;
  std::string session_id;
  std::uint64_t seed;
};

void print_report_summary(const SuiteReport& r, std::ostream& out) {
  for (const auto& s : r.sections) {
    out << fmt::format("[{}]\n", s.key);
    for (const auto& t : s.tasks) {
      std::string chance;
      if (t.threshold) {
        chance = fmt::format("  chance p95 {:.2f} ({})", *t.threshold,
                             *t.above_chance ? "above" : "not above");
      }
      out << fmt::format("  {:<8} {:>7.2f}  n={}{}{}\n", to_string(t.task), t.mean, t.sessions, chance,
                         t.task == TaskId::mbt ? "  (anticipation, not in overall)" : "");
    }
    if (s.overall) {
      out << fmt::format("  overall  {:>7.2f}{}\n", *s.overall, s.partial ? "  (partial)" : "");
    }
  }
  if (r.mismatches || r.aborted || r.invalid) {
    out << fmt::format("mismatched scores: {}, aborted sessions: {}, invalid transcripts: {}\n",
                       r.mismatches, r.aborted, r.invalid);
  }
}

int cmd_run(const RunFlags& f, std::istream& in, std::ostream& out, std::ostream& err) {
  const json file = read_config_file(f.config);
  const Difficulty difficulty =
      parse_difficulty(!f.difficulty.empty() ? f.difficulty : file.value("difficulty", std::string("easy")));
  const Strategy strategy =
      parse_strategy(!f.strategy.empty() ? f.strategy : file.value("strategy", std::string("free")));
  const std::uint64_t master = f.seed ? *f.seed : file.value("seed", std::uint64_t{0});
  std::vector<std::string> task_names = split_list(f.tasks);
  if (f.tasks == "all" && file.contains("tasks")) {
    task_names = file["tasks"].is_array() ? file["tasks"].get<std::vector<std::string>>()
                                          : split_list(file["tasks"].get<std::string>());
  }
  const auto tasks = parse_task_list(task_names);
  std::vector<Override> flag_overrides;
  for (const auto& s : f.sets) flag_overrides.push_back(parse_override(s));
  if (!f.embedder.empty()) flag_overrides.push_back({TaskId::oddball, "embedder", f.embedder});

  // Agent factory.
  const std::string agent_spec = f.agent;
  const bool human = agent_spec == "human";
  const bool remote = agent_spec == "remote" || agent_spec.starts_with("remote:");
  std::shared_ptr<RateLimiter> limiter;
  RemoteEndpoint endpoint;
  if (remote) {
    endpoint.base_url = f.endpoint;
    endpoint.model = agent_spec == "remote" ? f.model : agent_spec.substr(7);
    endpoint.requests_per_minute = f.rate_limit;
    endpoint.retry_budget = f.retry_budget;
    endpoint.timeout_seconds = f.timeout;
    if (endpoint.base_url.empty() || endpoint.model.empty()) {
      throw ConfigError("remote agent needs --endpoint and a model (--model or remote:<model>)");
    }
    const char* key = std::getenv(kApiKeyVariable);
    if (!key || !*key) throw ConfigError(fmt::format("remote agent needs {} in the environment", kApiKeyVariable));
    limiter = std::make_shared<RateLimiter>(f.rate_limit);
  } else if (!human && !agent_spec.starts_with("baseline:")) {
    throw ConfigError(fmt::format("unknown agent '{}' (baseline:<kind>, human, remote[:model])", agent_spec));
  }
  if (!human && !remote) make_baseline(agent_spec.substr(9));  // reject bad kinds before any work

  std::vector<Job> jobs;
  for (auto task : tasks) {
    TaskConfig c = build_config(task, difficulty, file, flag_overrides);
    c.seed = master;
    int sessions = c.sessions;
    if (file.contains("sessions")) sessions = file["sessions"].get<int>();
    if (f.sessions > 0) sessions = f.sessions;
    if (sessions < 1) throw ConfigError("sessions must be at least 1");
    c.sessions = sessions;
    for (int k = 1; k <= sessions; ++k) {
      jobs.push_back({c, fmt::format("{}-{}", to_string(c.difficulty), k),
                      derive_seed(master, fmt::format("session/{}", to_string(task)), k)});
    }
  }
  fs::create_directories(f.out);
  std::shared_ptr<RateLimiter> embed_limiter = limiter ? limiter : std::make_shared<RateLimiter>(f.rate_limit);

  std::vector<Transcript> results(jobs.size());
  std::vector<std::string> failures(jobs.size());
  auto run_job = [&](std::size_t i) {
    const Job& job = jobs[i];
    std::unique_ptr<Agent> agent;
    if (human) {
      agent = std::make_unique<HumanAgent>(in, out);
    } else if (remote) {
      agent = std::make_unique<RemoteAgent>(endpoint, limiter);
    } else {
      agent = make_baseline(agent_spec.substr(9));
    }
    std::unique_ptr<oddball::Embedder> embedder;
    if (job.config.task == TaskId::oddball && job.config.option("embedder") == "remote") {
      RemoteEndpoint e = endpoint;
      if (e.base_url.empty()) e.base_url = f.endpoint;
      e.model = f.embedding_model;
      e.retry_budget = f.retry_budget;
      if (e.base_url.empty()) throw ConfigError("remote embedder needs --endpoint");
      embedder = std::make_unique<RemoteEmbedder>(e, embed_limiter);
    }
    auto env = make_environment(job.config, job.seed);
    SessionOptions opt;
    opt.session_id = job.session_id;
    opt.strategy = strategy;
    opt.seed = job.seed;
    opt.max_retries = f.max_retries;
    opt.embedder = embedder.get();
    results[i] = run_session(*env, *agent, opt);
    save_transcript(results[i], fs::path(f.out) / transcript_file_name(results[i]));
  };

  const int workers = human ? 1 : std::max(1, f.parallel);
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
          try {
            run_job(i);
          } catch (...) {
            std::lock_guard lock(err_mu);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  int aborted = 0;
  for (const auto& t : results) {
    if (t.status == SessionStatus::aborted) {
      ++aborted;
      err << fmt::format("{} aborted: {}\n", transcript_file_name(t), t.error);
    } else {
      out << fmt::format("{} {:.2f}\n", transcript_file_name(t), t.score->score);
    }
  }
  ReportOptions ro;
  ro.chance_sims = f.chance_sims;
  ro.chance_seed = f.chance_seed;
  const auto report = build_report(f.out, ro);
  write_report(report, f.out);
  print_report_summary(report, out);
  return aborted ? kExitTransport : kExitOk;
}

int cmd_chance(const ChanceFlags& f, std::ostream& out) {
  const TaskId task = parse_task(f.task);
  require_chance_task(task);
  const json file = read_config_file(f.config);
  std::vector<Override> overrides;
  for (const auto& s : f.sets) overrides.push_back(parse_override(s));
  const TaskConfig c = build_config(task, parse_difficulty(f.difficulty), file, overrides);
  const auto e = estimate_chance(c, f.policy, f.sims, f.seed, f.workers);
  out << fmt::format("task={} difficulty={} policy={} sims={} seed={} mean={:.4f} p95={:.4f} sd={:.4f}\n",
                     to_string(e.task), to_string(e.difficulty), e.policy, e.n_sims, e.seed, e.mean, e.p95,
                     e.stddev);
  if (!f.out.empty()) {
    fs::create_directories(f.out);
    const auto path = fs::path(f.out) / fmt::format("chance_{}_{}_{}.json", to_string(e.task),
                                                    to_string(e.difficulty), e.policy);
    json j = to_json(e);
    j["config"] = to_json(c);
    std::ofstream(path, std::ios::binary | std::ios::trunc) << j.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_report(const ReportFlags& f, std::ostream& out) {
  ReportOptions ro;
  ro.chance_sims = f.chance_sims;
  ro.chance_seed = f.chance_seed;
  const auto report = build_report(f.dir, ro);
  write_report(report, f.dir);
  print_report_summary(report, out);
  for (const auto& row : report.rows) {
    if (row.mismatch || row.status == "invalid") {
      out << fmt::format("flagged: {} ({})\n", row.file,
                         row.error.empty() ? "stored score disagrees with replay" : row.error);
    }
  }
  return report.mismatches || report.invalid ? kExitValidation : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cognitive-task benchmark harness for chat agents", "reflection_bench"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Run agents through tasks and write transcripts and a report");
  run->add_option("--tasks", rf.tasks, "Comma list of tasks or 'all'");
  run->add_option("--agent", rf.agent, "baseline:<random|wsls|all_no|oracle|constant:TEXT>, human, remote[:MODEL]");
  run->add_option("--strategy", rf.strategy, "free, direct or cot");
  run->add_option("--difficulty", rf.difficulty, "easy, hard or custom");
  run->add_option("--set", rf.sets, "Parameter override key=value or task.key=value (repeatable)");
  run->add_option("--config", rf.config, "JSON config file");
  run->add_option("--sessions", rf.sessions, "Sessions per task (default: 2, oddball 3)");
  run->add_option("--seed", rf.seed, "Master seed");
  run->add_option("--out", rf.out, "Output directory");
  run->add_option("--parallel", rf.parallel, "Concurrent sessions (never for the human agent)");
  run->add_option("--max-retries", rf.max_retries, "Re-prompts after an unparseable reply");
  run->add_option("--endpoint", rf.endpoint, "Chat-completions base URL, e.g. https://host/v1");
  run->add_option("--model", rf.model, "Remote model name");
  run->add_option("--rate-limit", rf.rate_limit, "Requests per minute shared by all sessions");
  run->add_option("--retry-budget", rf.retry_budget, "Attempts per remote request");
  run->add_option("--timeout", rf.timeout, "Remote request timeout in seconds");
  run->add_option("--embedder", rf.embedder, "Oddball embedder: hash or remote");
  run->add_option("--embedding-model", rf.embedding_model, "Remote embedding model");
  run->add_option("--chance-sims", rf.chance_sims, "Simulations per chance estimate in the report");
  run->add_option("--chance-seed", rf.chance_seed, "Seed of the chance estimates in the report");

  ChanceFlags cf;
  auto* chance = app.add_subcommand("chance", "Monte Carlo chance level of a random policy");
  chance->add_option("--task", cf.task, "Task")->required();
  chance->add_option("--policy", cf.policy, "Policy (uniform, random_dimension, wsls, all_no, oracle)");
  chance->add_option("--sims", cf.sims, "Number of simulated sessions");
  chance->add_option("--seed", cf.seed, "Seed");
  chance->add_option("--difficulty", cf.difficulty, "easy, hard or custom");
  chance->add_option("--set", cf.sets, "Parameter override key=value (repeatable)");
  chance->add_option("--config", cf.config, "JSON config file");
  chance->add_option("--workers", cf.workers, "Worker threads (0: all cores)");
  chance->add_option("--out", cf.out, "Directory for the JSON result (empty: do not write)");

  ReportFlags pf;
  auto* report = app.add_subcommand("report", "Re-score a transcript directory and write report.csv/json");
  report->add_option("dir", pf.dir, "Transcript directory")->required();
  report->add_option("--chance-sims", pf.chance_sims, "Simulations per chance estimate");
  report->add_option("--chance-seed", pf.chance_seed, "Seed of the chance estimates");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(rf, in, out, err);
    if (*chance) return cmd_chance(cf, out);
    if (*report) return cmd_report(pf, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnsupportedTaskError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << '\n';
    return kExitTransport;
  }
  return kExitUsage;
}

}  // namespace reflect
