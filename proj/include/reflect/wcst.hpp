#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reflect/environment.hpp"
#include "reflect/rng.hpp"

namespace reflect::wcst {

enum class Shape { triangle, cross, circle, star };
enum class Color { red, green, yellow, blue };
enum class Rule { shape, color, number };

struct Card {
  Shape shape = Shape::triangle;
  Color color = Color::red;
  int number = 1;  // 1..4
  friend bool operator==(const Card&, const Card&) = default;
};

using Desk = std::array<Card, 4>;

inline constexpr int kBlocks = 6;
inline constexpr std::array<Rule, kBlocks> kSchedule = {Rule::shape, Rule::color, Rule::number,
                                                        Rule::shape, Rule::color, Rule::number};

// triangle red 1, cross green 2, circle yellow 3, star blue 4: pairwise
// distinct on every dimension, so each rule has exactly one correct card.
const Desk& default_desk();
// The desk as printed in the original instructions (circle yellow 1), which
// shares its number with triangle red 1.
const Desk& literal_desk();
const Desk& desk_for(const TaskConfig& config);

std::string to_string(const Card& card);
std::string_view to_string(Rule rule);
std::optional<Card> parse_card(std::string_view text);

// Rule in force on 1-based `trial` of an `x`-trial session.
Rule rule_for_trial(int trial, int x);

// Target matching one desk card per dimension, with the three matched cards
// distinct (uniform over the 4*3*2 assignments).
Card generate_target(const Desk& desk, Rng& rng);

bool judge_match(const Card& target, const Card& choice, Rule rule);
// Index of the first desk card agreeing with `target` on `rule`, or -1.
int matching_card(const Desk& desk, const Card& target, Rule rule);

// `correct` holds 1 for a right match, 0 otherwise.
double score(std::span<const std::uint8_t> correct);
// Accuracy (0..100) over consecutive x/6-trial blocks.
std::array<double, kBlocks> block_accuracy(std::span<const std::uint8_t> correct);

class WcstTask : public TaskEnvironment {
 public:
  WcstTask(TaskConfig config, std::uint64_t session_seed);

  TaskId task() const override { return TaskId::wcst; }
  const TaskConfig& config() const override { return config_; }
  std::string system_prompt() const override;
  int total_steps() const override { return config_.trials; }
  int steps_taken() const override { return trial_; }
  std::string observation() const override;
  std::vector<ChoiceToken> tokens() const override;
  StepResult step(const std::string& action) override;
  std::string oracle_action() const override;

 private:
  TaskConfig config_;
  Desk desk_;
  Rng rng_;
  int trial_ = 0;  // completed trials
  Card target_;
};

TaskScore score_transcript(const Transcript& transcript);

}  // namespace reflect::wcst
