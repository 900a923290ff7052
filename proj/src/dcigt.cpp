#include "reflect/dcigt.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace reflect::dcigt {
namespace {

constexpr std::array<int, 4> kGains = {100, 100, 50, 50};
constexpr std::array<int, 4> kLosses = {260, 1250, 50, 200};

std::string money(int amount) {
  return amount < 0 ? fmt::format("-${}", -amount) : fmt::format("${}", amount);
}

int idx(Deck d) { return static_cast<int>(d); }

}  // namespace

DeckTable make_decks(const std::array<double, 4>& p_loss) {
  DeckTable t;
  for (int i = 0; i < 4; ++i) t[i] = DeckSpec{kDecks[i], kGains[i], kLosses[i], p_loss[i]};
  return t;
}

DeckTable decks_for(const TaskConfig& c) {
  return make_decks({c.param("p_a"), c.param("p_b"), c.param("p_c"), c.param("p_d")});
}

std::string_view label(Deck deck) {
  static constexpr std::array<std::string_view, 4> names = {"AAA", "BBB", "CCC", "DDD"};
  return names[idx(deck)];
}

Deck parse_deck(std::string_view text) {
  for (auto d : kDecks)
    if (label(d) == text) return d;
  throw ValidationError(fmt::format("unknown deck '{}'", text));
}

Game::Game(DeckTable decks, int start_balance, Rng rng)
    : decks_(decks), balance_(start_balance), rng_(rng) {}

Outcome Game::draw(Deck deck) {
  const auto& spec = decks_[idx(deck)];
  return Outcome{spec.gain, rng_.bernoulli(spec.p_loss) ? spec.loss : 0};
}

Outcome Game::choose_first(Deck deck) {
  if (pending_) throw std::logic_error("dcigt: first choice already made for this trial");
  const Outcome revealed = draw(deck);
  pending_ = std::make_pair(deck, revealed);
  return revealed;
}

Outcome Game::choose_final(Deck deck) {
  if (!pending_) throw std::logic_error("dcigt: final choice before first choice");
  const auto [first, revealed] = *pending_;
  pending_.reset();
  const Outcome realized = deck == first ? revealed : draw(deck);
  balance_ += realized.net();
  history_.push_back({first, revealed, deck, realized, balance_});
  return realized;
}

TrialResult Game::play(Deck first, Deck final) {
  choose_first(first);
  choose_final(final);
  return history_.back();
}

std::string_view to_string(SwitchKind kind) {
  switch (kind) {
    case SwitchKind::insist_gain: return "insist_gain";
    case SwitchKind::insist_risk: return "insist_risk";
    case SwitchKind::unnecessary_switch: return "unnecessary_switch";
    case SwitchKind::loss_avoiding_switch: return "loss_avoiding_switch";
  }
  return "?";
}

SwitchKind classify_switch(bool revealed_loss, bool stayed) {
  if (stayed) return revealed_loss ? SwitchKind::insist_risk : SwitchKind::insist_gain;
  return revealed_loss ? SwitchKind::loss_avoiding_switch : SwitchKind::unnecessary_switch;
}

Anchors anchors(const DeckTable& decks, int trials, int start_balance) {
  double lo = decks[0].expected_value();
  double hi = lo;
  for (const auto& d : decks) {
    lo = std::min(lo, d.expected_value());
    hi = std::max(hi, d.expected_value());
  }
  return {start_balance + trials * lo, start_balance + trials * hi};
}

Result score(std::span<const TrialResult> trials, const DeckTable& decks, int start_balance,
             const Weights& weights) {
  Result r;
  r.final_balance = start_balance;
  for (const auto& t : trials) {
    r.final_balance += t.realized.net();
    ++r.switch_counts[static_cast<int>(classify_switch(t.revealed.has_loss(), t.first == t.final))];
  }
  const int n = static_cast<int>(trials.size());
  if (n > 0) {
    const int adaptive = r.switch_counts[static_cast<int>(SwitchKind::insist_gain)] +
                         r.switch_counts[static_cast<int>(SwitchKind::loss_avoiding_switch)];
    r.short_term = 100.0 * adaptive / n;
  }
  const Anchors a = anchors(decks, n, start_balance);
  if (a.best == a.worst) {
    r.long_term = 50.0;
  } else {
    r.long_term = 100.0 * std::clamp((r.final_balance - a.worst) / (a.best - a.worst), 0.0, 1.0);
  }
  r.score = (weights.short_term * r.short_term + weights.long_term * r.long_term) /
            (weights.short_term + weights.long_term);
  return r;
}

std::vector<std::array<double, 4>> deck_trajectory(std::span<const Deck> finals, int window) {
  std::vector<std::array<double, 4>> out;
  if (finals.empty() || window < 1) return out;
  const std::size_t w = std::min<std::size_t>(window, finals.size());
  for (std::size_t start = 0; start + w <= finals.size(); ++start) {
    std::array<double, 4> share{};
    for (std::size_t i = start; i < start + w; ++i) share[idx(finals[i])] += 1.0;
    for (auto& s : share) s /= static_cast<double>(w);
    out.push_back(share);
  }
  return out;
}

Deck best_deck(const DeckTable& decks, std::optional<Deck> excluded) {
  std::optional<Deck> best;
  for (const auto& d : decks) {
    if (excluded && d.deck == *excluded) continue;
    if (!best || d.expected_value() > decks[idx(*best)].expected_value()) best = d.deck;
  }
  return *best;
}

DcigtTask::DcigtTask(TaskConfig config, std::uint64_t session_seed)
    : config_(std::move(config)),
      game_(decks_for(config_), config_.int_param("start_balance"),
            Rng::stream(session_seed, "environment")) {}

std::string DcigtTask::system_prompt() const {
  return fmt::format(
      "You are participating in an interesting game. There are four decks of cards in front of "
      "you, labeled 'AAA', 'BBB', 'CCC', and 'DDD'. You start with {} in your account. Your goal "
      "is to maximize your account assets by making a series of choices from these decks. For "
      "each trial: 1. Choose one deck ('AAA', 'BBB', 'CCC', or 'DDD'). 2. You will receive "
      "feedback on the outcome of your choice, including any gains and losses. 3. After "
      "receiving the feedback, you have one opportunity to reconsider your initial decision; you "
      "can either stick with your original choice or make a new choice. 4. Your final choice "
      "would determine your actual gain or loss for the trial. Respond with your deck choice "
      "(AAA, BBB, CCC, or DDD) for each choice. keep making choices until instructed to stop.",
      money(config_.int_param("start_balance")));
}

std::string DcigtTask::observation() const {
  if (game_.awaiting_final()) {
    return "Make your final choice for this trial: keep your deck or choose another one.";
  }
  return fmt::format("Trial {}. Choose a deck.", steps_ / 2 + 1);
}

std::vector<ChoiceToken> DcigtTask::tokens() const { return task_tokens(TaskId::dcigt); }

StepResult DcigtTask::step(const std::string& action) {
  const Deck deck = parse_deck(action);
  const int trial = steps_ / 2 + 1;
  ++steps_;
  StepResult r;
  if (!game_.awaiting_final()) {
    last_first_ = deck;
    last_revealed_ = game_.choose_first(deck);
    r.feedback = fmt::format(
        "You chose {}: you won {} and lost {}. You may stick with {} or choose another deck.",
        label(deck), money(last_revealed_.gain), money(last_revealed_.loss), label(deck));
    r.outcome = {{"phase", "first"}, {"trial", trial}, {"deck", label(deck)},
                 {"gain", last_revealed_.gain}, {"loss", last_revealed_.loss}};
  } else {
    const Outcome realized = game_.choose_final(deck);
    r.feedback = fmt::format("Final choice {}: you won {} and lost {}. Your balance is now {}.",
                             label(deck), money(realized.gain), money(realized.loss),
                             money(game_.balance()));
    r.outcome = {{"phase", "final"}, {"trial", trial}, {"deck", label(deck)},
                 {"gain", realized.gain}, {"loss", realized.loss},
                 {"balance", game_.balance()}};
  }
  return r;
}

std::string DcigtTask::oracle_action() const {
  if (!game_.awaiting_final()) return std::string(label(best_deck(game_.decks())));
  if (last_revealed_.has_loss()) return std::string(label(best_deck(game_.decks(), last_first_)));
  return std::string(label(last_first_));
}

TaskScore score_transcript(const Transcript& t) {
  std::vector<TrialResult> trials;
  const int start = t.config.int_param("start_balance");
  int balance = start;
  for (std::size_t i = 0; i + 1 < t.records.size(); i += 2) {
    const auto& first = t.records[i];
    const auto& final = t.records[i + 1];
    if (outcome_at(first, "phase") != "first" || outcome_at(final, "phase") != "final") {
      throw ValidationError(fmt::format("record {}: choices out of order", first.index), first.index);
    }
    TrialResult tr;
    tr.first = parse_deck(first.action);
    tr.revealed = {outcome_at(first, "gain").get<int>(), outcome_at(first, "loss").get<int>()};
    tr.final = parse_deck(final.action);
    tr.realized = {outcome_at(final, "gain").get<int>(), outcome_at(final, "loss").get<int>()};
    if (tr.first == tr.final && (tr.realized.gain != tr.revealed.gain ||
                                 tr.realized.loss != tr.revealed.loss)) {
      throw ValidationError(
          fmt::format("record {}: stay must realize the revealed outcome", final.index), final.index);
    }
    balance += tr.realized.net();
    tr.balance = balance;
    trials.push_back(tr);
  }
  const DeckTable decks = decks_for(t.config);
  const Result res = score(trials, decks, start,
                           {t.config.param("short_weight"), t.config.param("long_weight")});
  const Anchors a = anchors(decks, static_cast<int>(trials.size()), start);

  std::vector<Deck> finals;
  for (const auto& tr : trials) finals.push_back(tr.final);
  nlohmann::json trajectory = nlohmann::json::array();
  for (const auto& row : deck_trajectory(finals)) trajectory.push_back(row);

  TaskScore s;
  s.task = TaskId::dcigt;
  s.score = res.score;
  s.metrics = {{"short_term", res.short_term}, {"long_term", res.long_term},
               {"final_balance", res.final_balance}, {"anchor_worst", a.worst},
               {"anchor_best", a.best}};
  nlohmann::json counts;
  for (int k = 0; k < 4; ++k) counts[std::string(to_string(static_cast<SwitchKind>(k)))] = res.switch_counts[k];
  s.behavior = {{"switch_counts", counts}, {"deck_trajectory", trajectory}};
  return s;
}

}  // namespace reflect::dcigt
