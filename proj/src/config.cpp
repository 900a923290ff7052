#include "reflect/config.hpp"

#include <charconv>
#include <cmath>
#include <vector>

#include <fmt/format.h>

namespace reflect {
namespace {

constexpr std::string_view kDefaultStandardSentence =
    "Wait, that sentence seems completely out of place and unrelated to the rest "
    "of the topic.";

double parse_number(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError(fmt::format("value '{}' for '{}' is not a number", value, key));
  }
  return out;
}

bool is_whole(double v) { return std::floor(v) == v; }

void require_probability(const TaskConfig& c, std::string_view key) {
  const double v = c.param(key);
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ConfigError(fmt::format("{}: parameter {}={} is not a probability",
                                  to_string(c.task), key, v));
  }
}

void require_positive_int(const TaskConfig& c, std::string_view key) {
  const double v = c.param(key);
  if (!(v >= 1.0) || !is_whole(v)) {
    throw ConfigError(fmt::format("{}: parameter {}={} must be a positive integer",
                                  to_string(c.task), key, v));
  }
}

}  // namespace

double TaskConfig::param(std::string_view key) const {
  auto it = params.find(std::string(key));
  if (it == params.end()) {
    throw ConfigError(fmt::format("{}: missing parameter '{}'", to_string(task), key));
  }
  return it->second;
}

int TaskConfig::int_param(std::string_view key) const {
  return static_cast<int>(std::lround(param(key)));
}

std::string TaskConfig::option(std::string_view key, std::string_view fallback) const {
  auto it = options.find(std::string(key));
  return it == options.end() ? std::string(fallback) : it->second;
}

TaskConfig preset(TaskId task, Difficulty difficulty) {
  const bool hard = difficulty == Difficulty::hard;
  TaskConfig c;
  c.task = task;
  c.difficulty = difficulty;
  c.sessions = kDefaultSessions;
  switch (task) {
    case TaskId::wpt:
      c.params["p"] = hard ? 0.8 : 0.9;
      c.trials = kWptDefaultTrials;
      break;
    case TaskId::wcst:
      c.params["x"] = hard ? 90 : 72;
      c.params["literal_desk"] = 0;
      break;
    case TaskId::nback:
      c.params["n"] = hard ? 4 : 2;
      // 10 of 24 scoreable positions match at n=2; the same rate at n=4.
      c.params["match_count"] = hard ? 9 : 10;
      c.params["fixed_sequence"] = 1;
      c.params["score_na_trials"] = 0;
      c.trials = kNbackDefaultLength;
      break;
    case TaskId::dcigt:
      c.params["p_a"] = 0.5;
      c.params["p_b"] = hard ? 0.2 : 0.1;
      c.params["p_c"] = 0.5;
      c.params["p_d"] = hard ? 0.2 : 0.1;
      c.params["start_balance"] = 2000;
      c.params["short_weight"] = 0.5;
      c.params["long_weight"] = 0.5;
      c.trials = kDcigtDefaultTrials;
      break;
    case TaskId::prlt:
      c.params["p"] = hard ? 0.7 : 0.8;
      c.trials = kPrltDefaultTrials;
      break;
    case TaskId::mbt:
      c.params["n"] = hard ? 4 : 2;
      c.params["blocks"] = kMbtBlocks;
      break;
    case TaskId::oddball:
      c.params["randomize_deviant"] = 1;
      c.options["standard_sentence"] = std::string(kDefaultStandardSentence);
      c.options["embedder"] = "hash";
      c.trials = 10;
      c.sessions = kOddballSessions;
      break;
  }
  finalize(c);
  return c;
}

void finalize(TaskConfig& c) {
  if (c.task == TaskId::wcst && c.params.contains("x")) c.trials = c.int_param("x");
  if (c.task == TaskId::mbt && c.params.contains("n") && c.params.contains("blocks")) {
    c.trials = c.int_param("n") * c.int_param("blocks");
  }
}

void apply_override(TaskConfig& c, std::string_view key, std::string_view value) {
  const std::string k(key);
  if (k == "sessions") {
    c.sessions = static_cast<int>(parse_number(key, value));
    return;
  }
  if (k == "seed") {
    c.seed = static_cast<std::uint64_t>(parse_number(key, value));
    return;
  }
  if (k == "trials") {
    if (c.task == TaskId::wcst || c.task == TaskId::mbt) {
      throw ConfigError(fmt::format("{}: trial count is derived; set {} instead",
                                    to_string(c.task), c.task == TaskId::wcst ? "x" : "n"));
    }
    const int trials = static_cast<int>(parse_number(key, value));
    if (trials != c.trials) c.difficulty = Difficulty::custom;
    c.trials = trials;
    return;
  }
  if (k == "p_loss") {
    if (c.task != TaskId::dcigt) throw ConfigError("p_loss applies to dcigt only");
    std::vector<double> values;
    std::string_view rest = value;
    while (!rest.empty()) {
      auto comma = rest.find(',');
      values.push_back(parse_number(key, rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (values.size() != 4) throw ConfigError("p_loss needs four comma-separated values");
    const char* names[] = {"p_a", "p_b", "p_c", "p_d"};
    for (int i = 0; i < 4; ++i) {
      if (c.params[names[i]] != values[i]) c.difficulty = Difficulty::custom;
      c.params[names[i]] = values[i];
    }
    return;
  }
  if (c.params.contains(k)) {
    const double v = parse_number(key, value);
    if (c.params[k] != v) c.difficulty = Difficulty::custom;
    c.params[k] = v;
    finalize(c);
    return;
  }
  if (c.options.contains(k)) {
    c.options[k] = std::string(value);
    return;
  }
  throw ConfigError(fmt::format("{}: unknown parameter '{}'", to_string(c.task), key));
}

void validate(const TaskConfig& c) {
  if (c.sessions < 1) throw ConfigError("sessions must be at least 1");
  if (c.trials < 1) throw ConfigError(fmt::format("{}: trials must be at least 1", to_string(c.task)));
  switch (c.task) {
    case TaskId::wpt:
      require_probability(c, "p");
      break;
    case TaskId::wcst: {
      require_positive_int(c, "x");
      if (c.int_param("x") % 6 != 0) {
        throw ConfigError(fmt::format("wcst: x={} is not divisible by 6", c.int_param("x")));
      }
      if (c.trials != c.int_param("x")) throw ConfigError("wcst: trials must equal x");
      break;
    }
    case TaskId::nback: {
      require_positive_int(c, "n");
      const double m = c.param("match_count");
      if (m < 0 || !is_whole(m)) throw ConfigError("nback: match_count must be a non-negative integer");
      if (c.int_param("match_count") > c.trials - c.int_param("n")) {
        throw ConfigError(fmt::format("nback: match_count={} exceeds the {} scoreable positions",
                                      c.int_param("match_count"), c.trials - c.int_param("n")));
      }
      break;
    }
    case TaskId::dcigt:
      for (auto key : {"p_a", "p_b", "p_c", "p_d", "short_weight", "long_weight"}) {
        require_probability(c, key);
      }
      if (c.param("short_weight") + c.param("long_weight") <= 0.0) {
        throw ConfigError("dcigt: score weights must not both be zero");
      }
      break;
    case TaskId::prlt:
      require_probability(c, "p");
      if (c.trials < 2) throw ConfigError("prlt: at least two trials are needed for a reversal");
      break;
    case TaskId::mbt:
      require_positive_int(c, "n");
      require_positive_int(c, "blocks");
      if (c.int_param("blocks") < 2) throw ConfigError("mbt: at least two blocks are needed for a reversal");
      if (c.trials != c.int_param("n") * c.int_param("blocks")) {
        throw ConfigError("mbt: trials must equal blocks * n");
      }
      break;
    case TaskId::oddball:
      if (c.option("standard_sentence").empty()) {
        throw ConfigError("oddball: standard_sentence must not be empty");
      }
      if (c.option("embedder") != "hash" && c.option("embedder") != "remote") {
        throw ConfigError(fmt::format("oddball: unknown embedder '{}'", c.option("embedder")));
      }
      break;
  }
}

int record_count(const TaskConfig& c) {
  return c.task == TaskId::dcigt ? 2 * c.trials : c.trials;
}

nlohmann::json to_json(const TaskConfig& c) {
  nlohmann::json j;
  j["task"] = std::string(to_string(c.task));
  j["difficulty"] = std::string(to_string(c.difficulty));
  j["params"] = c.params;
  if (!c.options.empty()) j["options"] = c.options;
  j["trials"] = c.trials;
  j["sessions"] = c.sessions;
  j["seed"] = c.seed;
  return j;
}

TaskConfig config_from_json(const nlohmann::json& j) {
  try {
    TaskConfig c;
    c.task = parse_task(j.at("task").get<std::string>());
    c.difficulty = parse_difficulty(j.at("difficulty").get<std::string>());
    c.params = j.at("params").get<std::map<std::string, double>>();
    if (j.contains("options")) c.options = j.at("options").get<std::map<std::string, std::string>>();
    c.trials = j.at("trials").get<int>();
    c.sessions = j.at("sessions").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed task config: ") + e.what());
  }
}

}  // namespace reflect
