#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "reflect/config.hpp"

namespace reflect {

// Policies the simulator knows, per task:
//   wpt     uniform, wsls, oracle
//   wcst    uniform, random_dimension, wsls, oracle
//   nback   uniform, all_no, oracle
//   dcigt   uniform, wsls, oracle
//   prlt    uniform, wsls, oracle
// "uniform" and "random_dimension" are the published chance policies; uniform,
// wsls and all_no draw exactly like the text baselines of the same name, so a
// simulated session scores the same as a real one with the same seed.
std::vector<std::string> chance_policies(TaskId task);
bool is_chance_policy(TaskId task, std::string_view policy);

// Throws UnsupportedTaskError for oddball and mbt.
void require_chance_task(TaskId task);

// Score of one simulated session whose session seed is `session_seed`.
double simulate_session(const TaskConfig& config, std::string_view policy, std::uint64_t session_seed);

struct ChanceEstimate {
  TaskId task = TaskId::wpt;
  Difficulty difficulty = Difficulty::easy;
  std::string policy;
  int n_sims = 0;
  std::uint64_t seed = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double p95 = 0.0;
};

inline constexpr int kMinChanceSims = 1000;

// Simulation i uses session seed derive_seed(seed, "chance", i). Workers
// split the index range; results are reduced in index order, so the worker
// count never changes the estimate. workers = 0 picks the hardware count.
ChanceEstimate estimate_chance(const TaskConfig& config, std::string_view policy, int n_sims,
                               std::uint64_t seed, int workers = 0);

// Linear interpolation between order statistics (h = (n - 1) q).
double percentile(std::vector<double> values, double q);

nlohmann::json to_json(const ChanceEstimate& e);
ChanceEstimate chance_from_json(const nlohmann::json& j);

}  // namespace reflect
