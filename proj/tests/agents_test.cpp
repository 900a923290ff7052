#include <doctest.h>

#include <sstream>

#include "reflect/chance.hpp"
#include "support.hpp"

using namespace reflect;

TEST_CASE("win detection from feedback text") {
  CHECK(feedback_is_win(TaskId::prlt, "Reward: 1", "left arm") == true);
  CHECK(feedback_is_win(TaskId::mbt, "Reward: 0", "left arm") == false);
  CHECK(feedback_is_win(TaskId::wcst, "Right", "x") == true);
  CHECK(feedback_is_win(TaskId::wcst, "Wrong", "x") == false);
  CHECK(feedback_is_win(TaskId::wpt, "The actual weather is sunny.", "sunny") == true);
  CHECK(feedback_is_win(TaskId::wpt, "The actual weather is rainy.", "sunny") == false);
  CHECK_FALSE(feedback_is_win(TaskId::nback, "", "Yes").has_value());
}

TEST_CASE("baseline factory") {
  CHECK(make_baseline("random")->name() == "random");
  CHECK(make_baseline("constant:left arm")->name() == "constant:left arm");
  CHECK_THROWS_AS(make_baseline("genius"), ConfigError);
  auto all_no = make_baseline("all_no");
  auto env = make_environment(preset(TaskId::prlt, Difficulty::easy), 1);
  CHECK_THROWS_AS(all_no->begin(*env, 1), ConfigError);
}

TEST_CASE("random agent comments neutrally when there are no options") {
  const auto t = testing::play(preset(TaskId::oddball, Difficulty::easy), "random", 1);
  for (const auto& r : t.records) CHECK(r.raw_response == kNeutralComment);
}

// The typed simulator and the text baseline must produce the same score for
// the same session seed.
TEST_CASE("typed chance policies replay the text baselines exactly") {
  const std::pair<const char*, const char*> pairs[] = {{"uniform", "random"}, {"wsls", "wsls"}, {"oracle", "oracle"}};
  for (auto task : {TaskId::wpt, TaskId::wcst, TaskId::nback, TaskId::dcigt, TaskId::prlt}) {
    for (auto diff : {Difficulty::easy, Difficulty::hard}) {
      const auto cfg = preset(task, diff);
      for (const auto& [policy, agent] : pairs) {
        if (task == TaskId::nback && std::string(policy) == "wsls") continue;
        for (std::uint64_t seed : {1u, 17u, 9001u}) {
          const auto t = testing::play(cfg, agent, seed);
          CHECK_MESSAGE(simulate_session(cfg, policy, seed) == doctest::Approx(t.score->score).epsilon(1e-12),
                        to_string(task), " ", policy, " seed ", seed);
        }
      }
    }
  }
  const auto cfg = preset(TaskId::nback, Difficulty::easy);
  CHECK(simulate_session(cfg, "all_no", 4) == testing::play(cfg, "all_no", 4).score->score);
}

TEST_CASE("human agent reproduces a scripted session from the same replies") {
  for (auto task : {TaskId::prlt, TaskId::dcigt, TaskId::nback, TaskId::oddball}) {
    const auto cfg = preset(task, Difficulty::easy);
    const auto scripted = testing::play(cfg, "wsls", 21, Strategy::cot);
    std::string lines;
    for (const auto& r : scripted.records) lines += r.raw_response + "\n";
    std::istringstream in(lines);
    std::ostringstream out;
    HumanAgent human(in, out);
    auto t = testing::play(cfg, human, 21, Strategy::cot);
    REQUIRE(t.status == SessionStatus::completed);
    t.agent = scripted.agent;
    CHECK(testing::dump(t) == testing::dump(scripted));
    // the terminal shows exactly the prompts a model receives
    const std::string shown = out.str();
    CHECK(shown.find(scripted.system_prompt) != std::string::npos);
    for (const auto& r : scripted.records) CHECK(shown.find(r.prompt) != std::string::npos);
  }
}

TEST_CASE("closing human input aborts the session") {
  std::istringstream in("left arm\nright arm\n");
  std::ostringstream out;
  HumanAgent human(in, out);
  const auto t = testing::play(preset(TaskId::prlt, Difficulty::easy), human, 2);
  CHECK(t.status == SessionStatus::aborted);
  CHECK(t.records.size() == 2);
  CHECK_FALSE(t.score.has_value());
  CHECK(t.error.find("human input closed") != std::string::npos);
}
