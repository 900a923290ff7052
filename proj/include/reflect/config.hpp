#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "reflect/types.hpp"

namespace reflect {

// Per-task parameter set. Numeric parameters live in `params` keyed by their
// conventional symbol:
//   wpt     p                       stay probability under sensor [1,0]
//   wcst    x, literal_desk         trial count (multiple of 6)
//   nback   n, match_count, fixed_sequence, score_na_trials
//   dcigt   p_a, p_b, p_c, p_d, start_balance, short_weight, long_weight
//   prlt    p                       reward probability of the initially-rich arm
//   mbt     n, blocks               block length, number of blocks
//   oddball randomize_deviant
// Text-valued options (oddball standard sentence, embedder name) live in
// `options`.
struct TaskConfig {
  TaskId task = TaskId::wpt;
  Difficulty difficulty = Difficulty::easy;
  std::map<std::string, double> params;
  std::map<std::string, std::string> options;
  int trials = 0;
  int sessions = 2;
  std::uint64_t seed = 0;

  double param(std::string_view key) const;
  int int_param(std::string_view key) const;
  bool flag(std::string_view key) const { return param(key) != 0.0; }
  std::string option(std::string_view key, std::string_view fallback = {}) const;
};

inline constexpr int kWptDefaultTrials = 50;
inline constexpr int kNbackDefaultLength = 26;
inline constexpr int kDcigtDefaultTrials = 40;
inline constexpr int kPrltDefaultTrials = 40;
inline constexpr int kMbtBlocks = 20;
inline constexpr int kDefaultSessions = 2;
inline constexpr int kOddballSessions = 3;

// Easy and hard rows of the experiment-settings table; custom starts from easy.
TaskConfig preset(TaskId task, Difficulty difficulty);

// Applies `key=value`. Recognised keys: any param symbol, "trials",
// "sessions", "seed", "p_loss" (comma list of four), and option names.
// Marks the config custom when a preset value changes.
void apply_override(TaskConfig& config, std::string_view key, std::string_view value);

// Recomputes trial counts tied to parameters (wcst: x, mbt: blocks*n).
void finalize(TaskConfig& config);

// Throws ConfigError naming the first violated constraint.
void validate(const TaskConfig& config);

// Records per session; DC-IGT logs two choices per trial.
int record_count(const TaskConfig& config);

nlohmann::json to_json(const TaskConfig& config);
TaskConfig config_from_json(const nlohmann::json& j);

}  // namespace reflect
