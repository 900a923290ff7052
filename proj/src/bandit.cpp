#include "reflect/bandit.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace reflect::bandit {
namespace {

constexpr std::string_view kPrompt = "Choose left arm or right arm.";

std::string reward_text(int r) { return fmt::format("Reward: {}", r); }

}  // namespace

std::string_view to_string(Arm arm) { return arm == Arm::left ? "left arm" : "right arm"; }

Arm parse_arm(std::string_view text) {
  if (text == "left arm") return Arm::left;
  if (text == "right arm") return Arm::right;
  throw ValidationError(fmt::format("unknown arm '{}'", text));
}

Prlt::Prlt(double p, int trials, Rng rng) : p_(p), trials_(trials), rng_(rng) {}

double Prlt::probability(Arm arm, int t) const {
  return arm == rich_arm(t) ? p_ : 1.0 - p_;
}

int Prlt::pull(Arm arm) {
  ++trial_;
  return rng_.bernoulli(probability(arm, trial_)) ? 1 : 0;
}

std::vector<double> estimate_choice_probability(std::span<const std::uint8_t> choices, int window) {
  std::vector<double> out(choices.size());
  int sum = 0;
  for (std::size_t t = 0; t < choices.size(); ++t) {
    sum += choices[t];
    if (t >= static_cast<std::size_t>(window)) sum -= choices[t - window];
    const auto width = std::min<std::size_t>(window, t + 1);
    out[t] = static_cast<double>(sum) / static_cast<double>(width);
  }
  return out;
}

std::vector<double> true_series(double p, int trials, int reversal_at) {
  std::vector<double> out(trials);
  for (int t = 0; t < trials; ++t) out[t] = t < reversal_at ? p : 1.0 - p;
  return out;
}

PrltResult score_prlt(std::span<const double> estimate, double p, int reversal_at) {
  PrltResult r;
  r.max_mae = std::max(p, 1.0 - p);
  if (estimate.empty()) return r;
  double total = 0.0;
  for (std::size_t t = 0; t < estimate.size(); ++t) {
    const double truth = static_cast<int>(t) < reversal_at ? p : 1.0 - p;
    total += std::abs(estimate[t] - truth);
  }
  r.mae = total / static_cast<double>(estimate.size());
  r.score = 100.0 * std::clamp(1.0 - r.mae / r.max_mae, 0.0, 1.0);
  return r;
}

Mbt::Mbt(int n, int blocks) : n_(n), blocks_(blocks) {}

Arm Mbt::rewarding(int t) const {
  const int block = (t - 1) / n_;
  return block % 2 == 0 ? Arm::left : Arm::right;
}

int Mbt::pull(Arm arm) {
  ++trial_;
  return arm == rewarding(trial_) ? 1 : 0;
}

MbtResult score_mbt(std::span<const int> rewards, int n, int blocks) {
  MbtResult r;
  r.grid.assign(blocks, std::vector<int>(n, 0));
  int anticipated = 0;
  for (std::size_t i = 0; i < rewards.size() && i < static_cast<std::size_t>(n * blocks); ++i) {
    const int block = static_cast<int>(i) / n;
    const int pos = static_cast<int>(i) % n;
    r.grid[block][pos] = rewards[i];
    r.total_reward += rewards[i];
    if (block > 0 && pos == 0) anticipated += rewards[i];
  }
  if (blocks > 1) r.anticipation = 100.0 * anticipated / (blocks - 1);
  return r;
}

PrltTask::PrltTask(TaskConfig config, std::uint64_t session_seed)
    : config_(std::move(config)),
      game_(config_.param("p"), config_.trials, Rng::stream(session_seed, "environment")) {}

std::string PrltTask::system_prompt() const {
  return "You are playing a two-arm bandit game. Each time you need to choose between the right "
         "arm and the left arm. You will receive feedback (0 or 1) based on your choice. Your goal "
         "is to maximize the total reward. Keep performing the task until the end of the test.";
}

std::string PrltTask::observation() const { return std::string(kPrompt); }

std::vector<ChoiceToken> PrltTask::tokens() const { return task_tokens(TaskId::prlt); }

StepResult PrltTask::step(const std::string& action) {
  const int reward = game_.pull(parse_arm(action));
  return {reward_text(reward), {{"reward", reward}}};
}

std::string PrltTask::oracle_action() const {
  return std::string(to_string(game_.rich_arm(game_.trial() + 1)));
}

MbtTask::MbtTask(TaskConfig config, std::uint64_t)
    : config_(std::move(config)), game_(config_.int_param("n"), config_.int_param("blocks")) {}

std::string MbtTask::system_prompt() const {
  return "You are playing a two-arm bandit game. Each time, there is one rewarding arm, and you "
         "need to choose between the right arm and the left arm. You will receive feedback (0 or "
         "1) based on your choice. Your goal is to maximize the total reward. Respond with your "
         "choice (right arm or left arm). Keep performing the task until the end of the test.";
}

std::string MbtTask::observation() const { return std::string(kPrompt); }

std::vector<ChoiceToken> MbtTask::tokens() const { return task_tokens(TaskId::mbt); }

StepResult MbtTask::step(const std::string& action) {
  const int reward = game_.pull(parse_arm(action));
  return {reward_text(reward), {{"reward", reward}}};
}

std::string MbtTask::oracle_action() const {
  return std::string(to_string(game_.rewarding(game_.trial() + 1)));
}

TaskScore score_prlt_transcript(const Transcript& t) {
  std::vector<std::uint8_t> rich;
  std::vector<int> rewards;
  for (const auto& r : t.records) {
    rich.push_back(parse_arm(r.action) == Arm::left);
    rewards.push_back(outcome_at(r, "reward").get<int>());
  }
  const double p = t.config.param("p");
  const int reversal = t.config.trials / 2;
  const auto estimate = estimate_choice_probability(rich);
  const auto res = score_prlt(estimate, p, reversal);

  TaskScore s;
  s.task = TaskId::prlt;
  s.score = res.score;
  s.metrics = {{"mae", res.mae}, {"max_mae", res.max_mae}, {"reversal_at", reversal}};
  s.behavior = {{"estimate", estimate},
                {"truth", true_series(p, static_cast<int>(rich.size()), reversal)},
                {"rewards", rewards}};
  return s;
}

TaskScore score_mbt_transcript(const Transcript& t) {
  const int n = t.config.int_param("n");
  const int blocks = t.config.int_param("blocks");
  std::vector<int> rewards;
  for (const auto& r : t.records) {
    // Rewards follow from the action alone, so recompute rather than trust.
    Mbt probe(n, blocks);
    rewards.push_back(parse_arm(r.action) == probe.rewarding(r.index) ? 1 : 0);
  }
  const auto res = score_mbt(rewards, n, blocks);
  TaskScore s;
  s.task = TaskId::mbt;
  s.score = res.anticipation;
  s.metrics = {{"anticipation", res.anticipation}, {"total_reward", res.total_reward}};
  s.behavior = {{"grid", res.grid}};
  return s;
}

}  // namespace reflect::bandit
