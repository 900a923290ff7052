#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reflect/environment.hpp"
#include "reflect/rng.hpp"

// Double-choice Iowa gambling task. Each trial: a first pick whose outcome is
// revealed, then a final pick that decides the realized payoff. Staying keeps
// the revealed outcome; switching draws a fresh outcome from the new deck.
namespace reflect::dcigt {

enum class Deck { a = 0, b = 1, c = 2, d = 3 };
inline constexpr std::array<Deck, 4> kDecks = {Deck::a, Deck::b, Deck::c, Deck::d};

struct DeckSpec {
  Deck deck = Deck::a;
  int gain = 0;
  int loss = 0;
  double p_loss = 0.0;
  double expected_value() const { return gain - loss * p_loss; }
};

using DeckTable = std::array<DeckSpec, 4>;

// Gains 100/100/50/50 and losses 260/1250/50/200 with the given loss
// probabilities.
DeckTable make_decks(const std::array<double, 4>& p_loss);
DeckTable decks_for(const TaskConfig& config);

std::string_view label(Deck deck);  // "AAA".."DDD"
Deck parse_deck(std::string_view text);

struct Outcome {
  int gain = 0;
  int loss = 0;
  int net() const { return gain - loss; }
  bool has_loss() const { return loss > 0; }
};

struct TrialResult {
  Deck first = Deck::a;
  Outcome revealed;
  Deck final = Deck::a;
  Outcome realized;
  int balance = 0;  // after the trial
};

class Game {
 public:
  Game(DeckTable decks, int start_balance, Rng rng);

  Outcome choose_first(Deck deck);
  Outcome choose_final(Deck deck);
  // Both picks of one trial.
  TrialResult play(Deck first, Deck final);

  int balance() const { return balance_; }
  bool awaiting_final() const { return pending_.has_value(); }
  const DeckTable& decks() const { return decks_; }
  const std::vector<TrialResult>& history() const { return history_; }

 private:
  Outcome draw(Deck deck);

  DeckTable decks_;
  int balance_;
  Rng rng_;
  std::optional<std::pair<Deck, Outcome>> pending_;
  std::vector<TrialResult> history_;
};

enum class SwitchKind { insist_gain, insist_risk, unnecessary_switch, loss_avoiding_switch };
std::string_view to_string(SwitchKind kind);
SwitchKind classify_switch(bool revealed_loss, bool stayed);

// Expected final balances of the worst and best constant stay-policies.
struct Anchors {
  double worst = 0.0;
  double best = 0.0;
};
Anchors anchors(const DeckTable& decks, int trials, int start_balance);

struct Weights {
  double short_term = 0.5;
  double long_term = 0.5;
};

struct Result {
  double short_term = 0.0;
  double long_term = 0.0;
  double score = 0.0;
  int final_balance = 0;
  std::array<int, 4> switch_counts{};  // indexed by SwitchKind
};

Result score(std::span<const TrialResult> trials, const DeckTable& decks, int start_balance,
             const Weights& weights = {});

// Sliding-window share of final picks per deck; each row sums to 1.
std::vector<std::array<double, 4>> deck_trajectory(std::span<const Deck> finals, int window = 10);

// Best deck by expected value other than `excluded` (or overall when none).
Deck best_deck(const DeckTable& decks, std::optional<Deck> excluded = std::nullopt);

class DcigtTask : public TaskEnvironment {
 public:
  DcigtTask(TaskConfig config, std::uint64_t session_seed);

  TaskId task() const override { return TaskId::dcigt; }
  const TaskConfig& config() const override { return config_; }
  std::string system_prompt() const override;
  int total_steps() const override { return 2 * config_.trials; }
  int steps_taken() const override { return steps_; }
  std::string observation() const override;
  std::vector<ChoiceToken> tokens() const override;
  StepResult step(const std::string& action) override;
  std::string oracle_action() const override;

 private:
  TaskConfig config_;
  Game game_;
  int steps_ = 0;
  Outcome last_revealed_;
  Deck last_first_ = Deck::a;
};

TaskScore score_transcript(const Transcript& transcript);

}  // namespace reflect::dcigt
