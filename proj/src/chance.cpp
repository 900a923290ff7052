#include "reflect/chance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "reflect/bandit.hpp"
#include "reflect/dcigt.hpp"
#include "reflect/nback.hpp"
#include "reflect/rng.hpp"
#include "reflect/wcst.hpp"
#include "reflect/wpt.hpp"

namespace reflect {
namespace {

Rng env_rng(std::uint64_t s) { return Rng::stream(s, "environment"); }
Rng agent_rng(std::uint64_t s) { return Rng::stream(s, "agent"); }

// Mirrors WslsAgent on a fixed option list: random first pick, stay on a
// win, uniform over the others on a loss.
struct Wsls {
  std::size_t options;
  Rng rng;
  int last = -1;
  int pick(std::optional<bool> win) {
    if (last >= 0 && win && *win) return last;
    if (last >= 0 && win) {
      int k = static_cast<int>(rng.below(options - 1));
      last = k >= last ? k + 1 : k;
      return last;
    }
    last = static_cast<int>(rng.below(options));
    return last;
  }
};

double sim_wpt(const TaskConfig& c, std::string_view policy, std::uint64_t seed) {
  const double p = c.param("p");
  wpt::Chain chain(p, env_rng(seed));
  Rng arng = agent_rng(seed);
  Wsls wsls{2, arng};
  std::optional<bool> win;
  for (int t = 0; t < c.trials; ++t) {
    wpt::Weather pred;
    if (policy == "uniform") {
      pred = static_cast<wpt::Weather>(arng.below(2));
    } else if (policy == "wsls") {
      pred = static_cast<wpt::Weather>(wsls.pick(win));
    } else {
      pred = wpt::optimal_prediction(p, chain.today(), chain.sensor());
    }
    win = chain.step(pred) == pred;
  }
  const auto est = wpt::estimate_internal_matrices(chain.history());
  return wpt::score(est.matrices, wpt::true_matrices(p));
}

double sim_wcst(const TaskConfig& c, std::string_view policy, std::uint64_t seed) {
  const auto& desk = wcst::desk_for(c);
  const int x = c.int_param("x");
  Rng erng = env_rng(seed);
  Rng arng = agent_rng(seed);
  Wsls wsls{4, arng};
  std::optional<bool> win;
  int hits = 0;
  wcst::Card target = wcst::generate_target(desk, erng);
  for (int t = 1; t <= x; ++t) {
    const wcst::Rule rule = wcst::rule_for_trial(t, x);
    int choice;
    if (policy == "uniform") {
      choice = static_cast<int>(arng.below(4));
    } else if (policy == "random_dimension") {
      const auto dim = static_cast<wcst::Rule>(arng.below(3));
      choice = wcst::matching_card(desk, target, dim);
    } else if (policy == "wsls") {
      choice = wsls.pick(win);
    } else {
      choice = wcst::matching_card(desk, target, rule);
    }
    const bool right = choice >= 0 && wcst::judge_match(target, desk[choice], rule);
    hits += right;
    win = right;
    if (t < x) target = wcst::generate_target(desk, erng);
  }
  return 100.0 * hits / x;
}

double sim_nback(const TaskConfig& c, const nback::Sequence& seq, std::string_view policy,
                 std::uint64_t seed) {
  Rng arng = agent_rng(seed);
  std::vector<nback::Label> answers(seq.letters.size());
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const bool leading = static_cast<int>(i) < seq.n;
    if (policy == "uniform") {
      answers[i] = leading ? nback::Label::not_available
                           : (arng.below(2) == 0 ? nback::Label::yes : nback::Label::no);
    } else if (policy == "all_no") {
      answers[i] = nback::Label::no;
    } else {
      answers[i] = seq.expected[i];
    }
  }
  return nback::score(answers, seq, c.flag("score_na_trials")).score;
}

double sim_dcigt(const TaskConfig& c, std::string_view policy, std::uint64_t seed) {
  const auto decks = dcigt::decks_for(c);
  const int start = c.int_param("start_balance");
  dcigt::Game game(decks, start, env_rng(seed));
  Rng arng = agent_rng(seed);
  Wsls wsls{4, arng};
  std::optional<bool> win;
  for (int t = 0; t < c.trials; ++t) {
    if (policy == "uniform") {
      const auto first = static_cast<dcigt::Deck>(arng.below(4));
      game.choose_first(first);
      game.choose_final(static_cast<dcigt::Deck>(arng.below(4)));
    } else if (policy == "wsls") {
      const auto first = static_cast<dcigt::Deck>(wsls.pick(win));
      const auto revealed = game.choose_first(first);
      const auto final = static_cast<dcigt::Deck>(wsls.pick(!revealed.has_loss()));
      win = !game.choose_final(final).has_loss();
    } else {
      const auto first = dcigt::best_deck(decks);
      const auto revealed = game.choose_first(first);
      game.choose_final(revealed.has_loss() ? dcigt::best_deck(decks, first) : first);
    }
  }
  return dcigt::score(game.history(), decks, start,
                      {c.param("short_weight"), c.param("long_weight")})
      .score;
}

double sim_prlt(const TaskConfig& c, std::string_view policy, std::uint64_t seed) {
  bandit::Prlt game(c.param("p"), c.trials, env_rng(seed));
  Rng arng = agent_rng(seed);
  Wsls wsls{2, arng};
  std::optional<bool> win;
  std::vector<std::uint8_t> rich(c.trials);
  for (int t = 0; t < c.trials; ++t) {
    bandit::Arm arm;
    if (policy == "uniform") {
      arm = static_cast<bandit::Arm>(arng.below(2));
    } else if (policy == "wsls") {
      arm = static_cast<bandit::Arm>(wsls.pick(win));
    } else {
      arm = game.rich_arm(t + 1);
    }
    rich[t] = arm == bandit::Arm::left;
    win = game.pull(arm) == 1;
  }
  const auto est = bandit::estimate_choice_probability(rich);
  return bandit::score_prlt(est, c.param("p"), game.reversal_at()).score;
}

}  // namespace

void require_chance_task(TaskId task) {
  if (task == TaskId::oddball || task == TaskId::mbt) {
    throw UnsupportedTaskError(fmt::format(
        "chance levels are not defined for {}: {}", to_string(task),
        task == TaskId::oddball ? "it has no parameterized choices" : "it is scored qualitatively"));
  }
}

std::vector<std::string> chance_policies(TaskId task) {
  switch (task) {
    case TaskId::wpt: return {"uniform", "wsls", "oracle"};
    case TaskId::wcst: return {"uniform", "random_dimension", "wsls", "oracle"};
    case TaskId::nback: return {"uniform", "all_no", "oracle"};
    case TaskId::dcigt: return {"uniform", "wsls", "oracle"};
    case TaskId::prlt: return {"uniform", "wsls", "oracle"};
    case TaskId::oddball:
    case TaskId::mbt: return {};
  }
  return {};
}

bool is_chance_policy(TaskId task, std::string_view policy) {
  return policy == "uniform" || (task == TaskId::wcst && policy == "random_dimension");
}

double simulate_session(const TaskConfig& c, std::string_view policy, std::uint64_t seed) {
  require_chance_task(c.task);
  switch (c.task) {
    case TaskId::wpt: return sim_wpt(c, policy, seed);
    case TaskId::wcst: return sim_wcst(c, policy, seed);
    case TaskId::nback: return sim_nback(c, nback::sequence_for(c, seed), policy, seed);
    case TaskId::dcigt: return sim_dcigt(c, policy, seed);
    case TaskId::prlt: return sim_prlt(c, policy, seed);
    default: break;
  }
  throw UnsupportedTaskError("unsupported task");
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ChanceEstimate estimate_chance(const TaskConfig& c, std::string_view policy, int n_sims,
                               std::uint64_t seed, int workers) {
  require_chance_task(c.task);
  validate(c);
  const auto known = chance_policies(c.task);
  if (std::find(known.begin(), known.end(), policy) == known.end()) {
    throw ConfigError(fmt::format("{}: unknown policy '{}'", to_string(c.task), policy));
  }
  if (n_sims < kMinChanceSims) {
    throw ConfigError(fmt::format("need at least {} simulations, got {}", kMinChanceSims, n_sims));
  }

  // A fixed sequence is the same for every session; build it once.
  std::optional<nback::Sequence> fixed;
  if (c.task == TaskId::nback && c.flag("fixed_sequence")) fixed = nback::sequence_for(c, 0);

  std::vector<double> scores(n_sims);
  auto run = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const auto s = derive_seed(seed, "chance", static_cast<std::uint64_t>(i));
      scores[i] = fixed ? sim_nback(c, *fixed, policy, s) : simulate_session(c, policy, s);
    }
  };
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, n_sims);
  if (workers == 1) {
    run(0, n_sims);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back(run, static_cast<int>(static_cast<long long>(n_sims) * w / workers),
                        static_cast<int>(static_cast<long long>(n_sims) * (w + 1) / workers));
    }
    for (auto& th : pool) th.join();
  }

  ChanceEstimate e;
  e.task = c.task;
  e.difficulty = c.difficulty;
  e.policy = std::string(policy);
  e.n_sims = n_sims;
  e.seed = seed;
  e.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n_sims;
  double ss = 0.0;
  for (double s : scores) ss += (s - e.mean) * (s - e.mean);
  e.stddev = std::sqrt(ss / std::max(1, n_sims - 1));
  e.p95 = percentile(std::move(scores), 0.95);
  return e;
}

nlohmann::json to_json(const ChanceEstimate& e) {
  return {{"task", to_string(e.task)}, {"difficulty", to_string(e.difficulty)},
          {"policy", e.policy},        {"n_sims", e.n_sims},
          {"seed", e.seed},            {"mean", e.mean},
          {"stddev", e.stddev},        {"p95", e.p95}};
}

ChanceEstimate chance_from_json(const nlohmann::json& j) {
  ChanceEstimate e;
  e.task = parse_task(j.at("task").get<std::string>());
  e.difficulty = parse_difficulty(j.at("difficulty").get<std::string>());
  e.policy = j.at("policy").get<std::string>();
  e.n_sims = j.at("n_sims").get<int>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.mean = j.at("mean").get<double>();
  e.stddev = j.at("stddev").get<double>();
  e.p95 = j.at("p95").get<double>();
  return e;
}

}  // namespace reflect
