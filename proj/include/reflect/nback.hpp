#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reflect/environment.hpp"
#include "reflect/rng.hpp"

namespace reflect::nback {

enum class Label { yes, no, not_available };

inline constexpr std::array<char, 4> kAlphabet = {'E', 'F', 'G', 'H'};

struct Sequence {
  std::vector<char> letters;
  int n = 2;
  std::vector<Label> expected;  // NotAvailable for the first n positions
};

std::string_view to_string(Label label);  // "Yes", "No", "Not Available"
Label parse_label(std::string_view text);

// Labels implied by the letters themselves.
std::vector<Label> labels_for(std::span<const char> letters, int n);

// Exactly `match_count` Yes positions among the length - n scoreable ones.
// Throws ConfigError when match_count does not fit.
Sequence generate_sequence(int n, int length, int match_count, Rng& rng);

// The canonical stimulus list shared by every session at this (n, length,
// match_count): generated once from a fixed seed.
Sequence default_sequence(int n, int length, int match_count);

struct Result {
  int correct = 0;
  int scoreable = 0;
  int na_compliant = 0;  // first-n answers that were "Not Available"
  double score = 0.0;
};

// 100 * correct / scoreable. First-n answers only count towards
// na_compliant unless score_na_trials is set, in which case every position
// is scored against its expected label.
Result score(std::span<const Label> answers, const Sequence& sequence,
             bool score_na_trials = false);

class NbackTask : public TaskEnvironment {
 public:
  NbackTask(TaskConfig config, std::uint64_t session_seed);

  TaskId task() const override { return TaskId::nback; }
  const TaskConfig& config() const override { return config_; }
  std::string system_prompt() const override;
  int total_steps() const override { return static_cast<int>(sequence_.letters.size()); }
  int steps_taken() const override { return position_; }
  std::string observation() const override;
  std::vector<ChoiceToken> tokens() const override;
  std::vector<std::string> choice_options() const override;
  std::string fallback_action(const std::optional<std::string>& last_valid) const override;
  StepResult step(const std::string& action) override;
  std::string oracle_action() const override;

  const Sequence& sequence() const { return sequence_; }

 private:
  TaskConfig config_;
  Sequence sequence_;
  int position_ = 0;
};

// Sequence a config (and session seed) presents.
Sequence sequence_for(const TaskConfig& config, std::uint64_t session_seed);

TaskScore score_transcript(const Transcript& transcript);

}  // namespace reflect::nback
