#include "reflect/nback.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

namespace reflect::nback {
namespace {

constexpr std::uint64_t kCanonicalSeed = 0x6e6261636bULL;

std::string system_prompt_for(int n) {
  return fmt::format(
      "You are playing a game. I will give you a series of characters in sequence, showing "
      "only one at a time. Your task is to determine whether the current character is the same "
      "as the character {0} steps before. If the current character is the same as the character "
      "{0} steps before, answer Yes. If the current character is different from the character {0} "
      "steps before, answer No. For the first {0} steps, since there aren't enough preceding "
      "characters for comparison, answer Not Available.",
      n);
}

}  // namespace

std::string_view to_string(Label label) {
  switch (label) {
    case Label::yes: return "Yes";
    case Label::no: return "No";
    case Label::not_available: return "Not Available";
  }
  return "?";
}

Label parse_label(std::string_view text) {
  if (text == "Yes") return Label::yes;
  if (text == "No") return Label::no;
  if (text == "Not Available") return Label::not_available;
  throw ValidationError(fmt::format("unknown n-back answer '{}'", text));
}

std::vector<Label> labels_for(std::span<const char> letters, int n) {
  std::vector<Label> out(letters.size(), Label::not_available);
  for (std::size_t i = n; i < letters.size(); ++i) {
    out[i] = letters[i] == letters[i - n] ? Label::yes : Label::no;
  }
  return out;
}

Sequence generate_sequence(int n, int length, int match_count, Rng& rng) {
  if (n < 1 || length < n) throw ConfigError("nback: need n >= 1 and length >= n");
  const int scoreable = length - n;
  if (match_count < 0 || match_count > scoreable) {
    throw ConfigError(fmt::format("nback: cannot place {} matches in {} scoreable positions",
                                  match_count, scoreable));
  }
  std::vector<int> positions(scoreable);
  std::iota(positions.begin(), positions.end(), n);
  rng.shuffle(std::span<int>(positions));
  std::vector<char> is_match(length, 0);
  for (int i = 0; i < match_count; ++i) is_match[positions[i]] = 1;

  Sequence seq;
  seq.n = n;
  seq.letters.resize(length);
  for (int i = 0; i < length; ++i) {
    if (i < n) {
      seq.letters[i] = kAlphabet[rng.below(kAlphabet.size())];
    } else if (is_match[i]) {
      seq.letters[i] = seq.letters[i - n];
    } else {
      // Any letter except the one n back.
      std::array<char, 3> others{};
      int k = 0;
      for (char c : kAlphabet)
        if (c != seq.letters[i - n]) others[k++] = c;
      seq.letters[i] = others[rng.below(others.size())];
    }
  }
  seq.expected = labels_for(seq.letters, n);
  return seq;
}

Sequence default_sequence(int n, int length, int match_count) {
  Rng rng = Rng::stream(kCanonicalSeed, "nback-sequence",
                        static_cast<std::uint64_t>(n) * 1000 + static_cast<std::uint64_t>(length));
  return generate_sequence(n, length, match_count, rng);
}

Result score(std::span<const Label> answers, const Sequence& seq, bool score_na_trials) {
  Result r;
  const std::size_t count = std::min(answers.size(), seq.expected.size());
  for (std::size_t i = 0; i < count; ++i) {
    const bool leading = static_cast<int>(i) < seq.n;
    if (leading) r.na_compliant += answers[i] == Label::not_available;
    if (leading && !score_na_trials) continue;
    ++r.scoreable;
    r.correct += answers[i] == seq.expected[i];
  }
  r.score = r.scoreable == 0 ? 0.0 : 100.0 * r.correct / r.scoreable;
  return r;
}

Sequence sequence_for(const TaskConfig& config, std::uint64_t session_seed) {
  const int n = config.int_param("n");
  const int matches = config.int_param("match_count");
  if (config.flag("fixed_sequence")) return default_sequence(n, config.trials, matches);
  Rng rng = Rng::stream(session_seed, "environment");
  return generate_sequence(n, config.trials, matches, rng);
}

NbackTask::NbackTask(TaskConfig config, std::uint64_t session_seed)
    : config_(std::move(config)), sequence_(sequence_for(config_, session_seed)) {}

std::string NbackTask::system_prompt() const { return system_prompt_for(sequence_.n); }

std::string NbackTask::observation() const {
  return fmt::format("Current character: {}", sequence_.letters[position_]);
}

std::vector<ChoiceToken> NbackTask::tokens() const { return task_tokens(TaskId::nback); }

std::vector<std::string> NbackTask::choice_options() const {
  if (position_ < sequence_.n) return {"Not Available"};
  return {"Yes", "No"};
}

std::string NbackTask::fallback_action(const std::optional<std::string>&) const { return "No"; }

StepResult NbackTask::step(const std::string& action) {
  parse_label(action);
  const int i = position_++;
  StepResult r;
  r.outcome = {{"letter", std::string(1, sequence_.letters[i])},
               {"expected", to_string(sequence_.expected[i])}};
  return r;
}

std::string NbackTask::oracle_action() const {
  return std::string(to_string(sequence_.expected[position_]));
}

TaskScore score_transcript(const Transcript& t) {
  // Rebuild the presented stimulus list from the records themselves.
  Sequence seq;
  seq.n = t.config.int_param("n");
  std::vector<Label> answers;
  for (const auto& r : t.records) {
    const auto letter = outcome_at(r, "letter").get<std::string>();
    if (letter.size() != 1) throw ValidationError(fmt::format("record {}: bad letter", r.index), r.index);
    seq.letters.push_back(letter[0]);
    answers.push_back(parse_label(r.action));
  }
  seq.expected = labels_for(seq.letters, seq.n);
  const Result res = score(answers, seq, t.config.flag("score_na_trials"));

  TaskScore s;
  s.task = TaskId::nback;
  s.score = res.score;
  s.metrics = {{"correct", res.correct}, {"scoreable", res.scoreable},
               {"na_compliant", res.na_compliant}, {"n", seq.n}};
  std::vector<std::string> answer_text;
  for (auto a : answers) answer_text.emplace_back(to_string(a));
  s.behavior = {{"letters", std::string(seq.letters.begin(), seq.letters.end())},
                {"answers", answer_text}};
  return s;
}

}  // namespace reflect::nback
