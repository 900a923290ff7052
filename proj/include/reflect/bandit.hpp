#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reflect/environment.hpp"
#include "reflect/rng.hpp"

// Two-armed bandits. PRLT: Bernoulli arms with probabilities p and 1 - p that
// swap once at the midpoint. MBT: deterministic 0/1 arms that swap every n
// trials for a fixed number of blocks.
namespace reflect::bandit {

enum class Arm { left = 0, right = 1 };

std::string_view to_string(Arm arm);  // "left arm" / "right arm"
Arm parse_arm(std::string_view text);
inline Arm other(Arm a) { return a == Arm::left ? Arm::right : Arm::left; }

// The left arm starts rich.
class Prlt {
 public:
  Prlt(double p, int trials, Rng rng);

  int reversal_at() const { return trials_ / 2; }
  // Reward probability of `arm` on 1-based trial t.
  double probability(Arm arm, int t) const;
  Arm rich_arm(int t) const { return t <= reversal_at() ? Arm::left : Arm::right; }
  int trial() const { return trial_; }  // trials already played

  int pull(Arm arm);

 private:
  double p_;
  int trials_;
  Rng rng_;
  int trial_ = 0;
};

// Trailing mean of `choices` (1 = initially-rich arm) over min(window, t)
// most recent trials.
std::vector<double> estimate_choice_probability(std::span<const std::uint8_t> choices,
                                                int window = 5);

// p up to and including reversal_at, 1 - p afterwards.
std::vector<double> true_series(double p, int trials, int reversal_at);

struct PrltResult {
  double mae = 0.0;
  double max_mae = 0.0;
  double score = 0.0;
};

// (1 - MAE / max(p, 1 - p)) * 100 clamped to [0, 100].
PrltResult score_prlt(std::span<const double> estimate, double p, int reversal_at);

class Mbt {
 public:
  Mbt(int n, int blocks);

  int total() const { return n_ * blocks_; }
  // Block 1 rewards the left arm; the mapping flips every n trials.
  Arm rewarding(int t) const;
  int trial() const { return trial_; }
  int pull(Arm arm);

 private:
  int n_;
  int blocks_;
  int trial_ = 0;
};

struct MbtResult {
  double anticipation = 0.0;  // % of blocks 2.. whose first trial paid out
  int total_reward = 0;
  std::vector<std::vector<int>> grid;  // blocks x n rewards
};

MbtResult score_mbt(std::span<const int> rewards, int n, int blocks);

class PrltTask : public TaskEnvironment {
 public:
  PrltTask(TaskConfig config, std::uint64_t session_seed);

  TaskId task() const override { return TaskId::prlt; }
  const TaskConfig& config() const override { return config_; }
  std::string system_prompt() const override;
  int total_steps() const override { return config_.trials; }
  int steps_taken() const override { return game_.trial(); }
  std::string observation() const override;
  std::vector<ChoiceToken> tokens() const override;
  StepResult step(const std::string& action) override;
  std::string oracle_action() const override;

 private:
  TaskConfig config_;
  Prlt game_;
};

class MbtTask : public TaskEnvironment {
 public:
  MbtTask(TaskConfig config, std::uint64_t session_seed);

  TaskId task() const override { return TaskId::mbt; }
  const TaskConfig& config() const override { return config_; }
  std::string system_prompt() const override;
  int total_steps() const override { return game_.total(); }
  int steps_taken() const override { return game_.trial(); }
  std::string observation() const override;
  std::vector<ChoiceToken> tokens() const override;
  StepResult step(const std::string& action) override;
  std::string oracle_action() const override;

 private:
  TaskConfig config_;
  Mbt game_;
};

TaskScore score_prlt_transcript(const Transcript& transcript);
TaskScore score_mbt_transcript(const Transcript& transcript);

}  // namespace reflect::bandit
