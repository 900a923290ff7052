#include "reflect/wcst.hpp"

#include <fmt/format.h>

#include "reflect/parse.hpp"

namespace reflect::wcst {
namespace {

constexpr std::array<std::string_view, 4> kShapeNames = {"triangle", "cross", "circle", "star"};
constexpr std::array<std::string_view, 4> kColorNames = {"red", "green", "yellow", "blue"};

// All (shape card, color card, number card) index triples with distinct cards.
constexpr auto kAssignments = [] {
  std::array<std::array<int, 3>, 24> out{};
  int k = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int m = 0; m < 4; ++m)
        if (i != j && j != m && i != m) out[k++] = {i, j, m};
  return out;
}();

}  // namespace

const Desk& default_desk() {
  static const Desk desk = {Card{Shape::triangle, Color::red, 1}, Card{Shape::cross, Color::green, 2},
                            Card{Shape::circle, Color::yellow, 3}, Card{Shape::star, Color::blue, 4}};
  return desk;
}

const Desk& literal_desk() {
  static const Desk desk = {Card{Shape::triangle, Color::red, 1}, Card{Shape::cross, Color::green, 2},
                            Card{Shape::circle, Color::yellow, 1}, Card{Shape::star, Color::blue, 4}};
  return desk;
}

const Desk& desk_for(const TaskConfig& config) {
  auto it = config.params.find("literal_desk");
  return it != config.params.end() && it->second != 0.0 ? literal_desk() : default_desk();
}

std::string to_string(const Card& card) {
  return fmt::format("{} {} {}", kShapeNames[static_cast<int>(card.shape)],
                     kColorNames[static_cast<int>(card.color)], card.number);
}

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::shape: return "shape";
    case Rule::color: return "color";
    case Rule::number: return "number";
  }
  return "?";
}

std::optional<Card> parse_card(std::string_view text) {
  const std::string norm = normalize_reply(text);
  for (int s = 0; s < 4; ++s)
    for (int c = 0; c < 4; ++c)
      for (int n = 1; n <= 4; ++n) {
        Card card{static_cast<Shape>(s), static_cast<Color>(c), n};
        if (norm == to_string(card)) return card;
      }
  return std::nullopt;
}

Rule rule_for_trial(int trial, int x) {
  const int block_len = x / kBlocks;
  int block = (trial - 1) / block_len;
  if (block >= kBlocks) block = kBlocks - 1;
  return kSchedule[block];
}

Card generate_target(const Desk& desk, Rng& rng) {
  const auto& a = kAssignments[rng.below(kAssignments.size())];
  return Card{desk[a[0]].shape, desk[a[1]].color, desk[a[2]].number};
}

bool judge_match(const Card& target, const Card& choice, Rule rule) {
  switch (rule) {
    case Rule::shape: return target.shape == choice.shape;
    case Rule::color: return target.color == choice.color;
    case Rule::number: return target.number == choice.number;
  }
  return false;
}

int matching_card(const Desk& desk, const Card& target, Rule rule) {
  for (int i = 0; i < 4; ++i)
    if (judge_match(target, desk[i], rule)) return i;
  return -1;
}

double score(std::span<const std::uint8_t> correct) {
  if (correct.empty()) return 0.0;
  int hits = 0;
  for (auto c : correct) hits += c != 0;
  return 100.0 * hits / static_cast<double>(correct.size());
}

std::array<double, kBlocks> block_accuracy(std::span<const std::uint8_t> correct) {
  std::array<double, kBlocks> out{};
  const std::size_t len = correct.size() / kBlocks;
  if (len == 0) return out;
  for (int b = 0; b < kBlocks; ++b) out[b] = score(correct.subspan(b * len, len));
  return out;
}

WcstTask::WcstTask(TaskConfig config, std::uint64_t session_seed)
    : config_(std::move(config)),
      desk_(desk_for(config_)),
      rng_(Rng::stream(session_seed, "environment")) {
  target_ = generate_target(desk_, rng_);
}

std::string WcstTask::system_prompt() const {
  const auto a = to_string(desk_[0]), b = to_string(desk_[1]), c = to_string(desk_[2]),
             d = to_string(desk_[3]);
  return fmt::format(
      "You are performing an interesting Task. In this task, you have four cards on your desk, "
      "that is, '{}', '{}', '{}', and '{}'. The three word/figure represent (1) the type of "
      "shape, i.e. triangle, cross, circle, or star, (2) the color of the shape, i.e. red, "
      "green, yellow, or blue, and (3) the number of the shape, i.e., 1, 2, 3, or 4, "
      "respectively. At each trial, you will be presented with a testing card. You should "
      "point out which card on your desk matches the testing card. I will not tell you the "
      "matching rule, but only provide feedback if your choice was right or wrong. Your primary "
      "goal is to strive to maximize your accuracy rate. Respond with your option ('{}', '{}', "
      "'{}', or '{}'). Keep performing the task until the end of the test.",
      a, b, c, d, a, b, c, d);
}

std::string WcstTask::observation() const {
  return fmt::format("Testing card: {}.", to_string(target_));
}

std::vector<ChoiceToken> WcstTask::tokens() const {
  std::vector<ChoiceToken> out;
  for (const auto& card : desk_) out.push_back({to_string(card), {}});
  return out;
}

StepResult WcstTask::step(const std::string& action) {
  const auto choice = parse_card(action);
  if (!choice) throw std::invalid_argument("wcst: action is not a card: " + action);
  ++trial_;
  const Rule rule = rule_for_trial(trial_, config_.trials);
  const bool right = judge_match(target_, *choice, rule);
  StepResult r;
  r.feedback = right ? "Right" : "Wrong";
  r.outcome = {{"target", to_string(target_)}, {"rule", to_string(rule)}, {"correct", right}};
  if (trial_ < config_.trials) target_ = generate_target(desk_, rng_);
  return r;
}

std::string WcstTask::oracle_action() const {
  const Rule rule = rule_for_trial(trial_ + 1, config_.trials);
  return to_string(desk_[matching_card(desk_, target_, rule)]);
}

TaskScore score_transcript(const Transcript& t) {
  const int x = t.config.int_param("x");
  std::vector<std::uint8_t> correct;
  correct.reserve(t.records.size());
  for (const auto& r : t.records) {
    const auto target = parse_card(outcome_at(r, "target").get<std::string>());
    const auto choice = parse_card(r.action);
    if (!target || !choice) {
      throw ValidationError(fmt::format("record {}: unreadable card", r.index), r.index);
    }
    correct.push_back(judge_match(*target, *choice, rule_for_trial(r.index, x)));
  }
  TaskScore s;
  s.task = TaskId::wcst;
  s.score = score(correct);
  int hits = 0;
  for (auto c : correct) hits += c;
  s.metrics = {{"correct", hits}, {"trials", static_cast<int>(correct.size())}};
  s.behavior = {{"block_accuracy", block_accuracy(correct)}};
  return s;
}

}  // namespace reflect::wcst
