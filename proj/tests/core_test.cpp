#include <doctest.h>

#include <set>
#include <sstream>

#include "reflect/config.hpp"
#include "reflect/parse.hpp"
#include "reflect/rng.hpp"
#include "reflect/transcript.hpp"
#include "support.hpp"

using namespace reflect;

TEST_CASE("rng streams are reproducible and independent") {
  Rng a = Rng::stream(42, "environment");
  Rng b = Rng::stream(42, "environment");
  Rng c = Rng::stream(42, "agent");
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs |= x != c.next();
  }
  CHECK(differs);
  CHECK(derive_seed(1, "x", 0) != derive_seed(1, "x", 1));
  CHECK(derive_seed(1, "x", 0) != derive_seed(2, "x", 0));
}

TEST_CASE("below(1) consumes no draw") {
  Rng a(7), b(7);
  CHECK(a.below(1) == 0);
  CHECK(a.next() == b.next());
}

TEST_CASE("uniform draws look uniform") {
  Rng r(3);
  std::array<int, 6> hist{};
  const int n = 60000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    ++hist[r.below(6)];
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  // 5 sigma on each binomial cell
  for (int h : hist) CHECK(std::abs(h - 10000) < 5 * std::sqrt(n * (1.0 / 6) * (5.0 / 6)));
}

TEST_CASE("task, strategy and difficulty names round-trip") {
  for (auto t : kAllTasks) CHECK(parse_task(to_string(t)) == t);
  CHECK(parse_task("n-back") == TaskId::nback);
  CHECK(parse_task("dc-igt") == TaskId::dcigt);
  CHECK(parse_strategy("cot") == Strategy::cot);
  CHECK(parse_difficulty("hard") == Difficulty::hard);
  CHECK_THROWS_AS(parse_task("chess"), ConfigError);
  CHECK_THROWS_AS(parse_strategy("loud"), ConfigError);
}

TEST_CASE("presets hold the experiment settings") {
  CHECK(preset(TaskId::wpt, Difficulty::easy).param("p") == 0.9);
  CHECK(preset(TaskId::wpt, Difficulty::hard).param("p") == 0.8);
  CHECK(preset(TaskId::wcst, Difficulty::easy).trials == 72);
  CHECK(preset(TaskId::wcst, Difficulty::hard).trials == 90);
  CHECK(preset(TaskId::nback, Difficulty::easy).param("n") == 2);
  CHECK(preset(TaskId::nback, Difficulty::hard).param("n") == 4);
  CHECK(preset(TaskId::prlt, Difficulty::easy).param("p") == 0.8);
  CHECK(preset(TaskId::prlt, Difficulty::hard).param("p") == 0.7);
  CHECK(preset(TaskId::mbt, Difficulty::easy).trials == 40);
  CHECK(preset(TaskId::mbt, Difficulty::hard).trials == 80);
  const auto d = preset(TaskId::dcigt, Difficulty::hard);
  CHECK(d.param("p_a") == 0.5);
  CHECK(d.param("p_b") == 0.2);
  CHECK(d.param("p_c") == 0.5);
  CHECK(d.param("p_d") == 0.2);
}

TEST_CASE("trial count contract") {
  CHECK(record_count(preset(TaskId::wpt, Difficulty::easy)) == 50);
  CHECK(record_count(preset(TaskId::wcst, Difficulty::easy)) == 72);
  CHECK(record_count(preset(TaskId::nback, Difficulty::easy)) == 26);
  CHECK(record_count(preset(TaskId::dcigt, Difficulty::easy)) == 80);
  CHECK(record_count(preset(TaskId::prlt, Difficulty::easy)) == 40);
  CHECK(record_count(preset(TaskId::mbt, Difficulty::easy)) == 40);
}

TEST_CASE("overrides mark configs custom and are validated") {
  auto c = preset(TaskId::prlt, Difficulty::easy);
  apply_override(c, "p", "0.8");
  CHECK(c.difficulty == Difficulty::easy);
  apply_override(c, "p", "0.6");
  CHECK(c.difficulty == Difficulty::custom);
  auto bad = preset(TaskId::prlt, Difficulty::easy);
  apply_override(bad, "p", "1.5");
  CHECK_THROWS_AS(validate(bad), ConfigError);
  auto w = preset(TaskId::wcst, Difficulty::easy);
  apply_override(w, "x", "70");
  finalize(w);
  CHECK_THROWS_AS(validate(w), ConfigError);
  auto m = preset(TaskId::mbt, Difficulty::easy);
  apply_override(m, "blocks", "1");
  finalize(m);
  CHECK_THROWS_AS(validate(m), ConfigError);
  auto dc = preset(TaskId::dcigt, Difficulty::easy);
  apply_override(dc, "p_loss", "0.5,0,0.5,0.1");
  CHECK(dc.param("p_b") == 0.0);
  CHECK_THROWS_AS(apply_override(dc, "p", "abc"), ConfigError);
}

TEST_CASE("config json round-trip") {
  for (auto t : kAllTasks) {
    const auto c = preset(t, Difficulty::hard);
    const auto back = config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
  }
}

TEST_CASE("strategy suffixes are verbatim") {
  CHECK(apply_strategy("Choose an arm.", Strategy::direct) ==
        "Choose an arm. respond only with your choice directly without outputting any other information or "
        "analysis.");
  CHECK(apply_strategy("Pick a card.", Strategy::cot) == "Pick a card. let's think step by step.");
  CHECK(apply_strategy("anything at all", Strategy::free) == "anything at all");
}

TEST_CASE("parse examples") {
  CHECK(parse_choice(TaskId::prlt, "I think... therefore left arm.") == "left arm");
  CHECK(parse_choice(TaskId::prlt, "Not right arm \xe2\x80\x94 left arm!") == "left arm");
  CHECK_FALSE(parse_choice(TaskId::wpt, "The weather will improve").has_value());
  CHECK(parse_choice(TaskId::nback, "not available") == "Not Available");
  // "no" must not match inside "not"
  CHECK(parse_choice(TaskId::nback, "Not Available") == "Not Available");
}

// Hand-labelled replies: (task, reply, expected canonical token or "" for none).
struct Labelled {
  TaskId task;
  const char* reply;
  const char* expected;
};

static const Labelled kParseSet[] = {
    {TaskId::prlt, "left arm", "left arm"},
    {TaskId::prlt, "Right arm.", "right arm"},
    {TaskId::prlt, "I'll go with the LEFT ARM", "left arm"},
    {TaskId::prlt, "The left arm paid last time, so right arm now.", "right arm"},
    {TaskId::prlt, "right arm? no, left arm", "left arm"},
    {TaskId::prlt, "Choose: left-arm", "left arm"},
    {TaskId::prlt, "I am not sure.", ""},
    {TaskId::prlt, "", ""},
    // bare "left"/"right" are accepted, so the last one named wins
    {TaskId::prlt, "left or right, hard to say", "right arm"},
    {TaskId::prlt, "**Right arm**", "right arm"},
    {TaskId::mbt, "left arm", "left arm"},
    {TaskId::mbt, "Switching to the right arm this time.", "right arm"},
    {TaskId::mbt, "armless", ""},
    {TaskId::wpt, "sunny", "sunny"},
    {TaskId::wpt, "Rainy.", "rainy"},
    {TaskId::wpt, "Sensor [0,1] means switch; today is sunny so tomorrow rainy", "rainy"},
    {TaskId::wpt, "It was rainy, I predict sunny", "sunny"},
    {TaskId::wpt, "cloudy", ""},
    {TaskId::wpt, "SUNNY!!!", "sunny"},
    {TaskId::wpt, "The weather will improve", ""},
    {TaskId::nback, "Yes", "Yes"},
    {TaskId::nback, "no", "No"},
    {TaskId::nback, "Not Available", "Not Available"},
    {TaskId::nback, "Not available.", "Not Available"},
    {TaskId::nback, "It is not a match, so No", "No"},
    {TaskId::nback, "E two back was E, yes", "Yes"},
    {TaskId::nback, "Nothing to compare", ""},
    {TaskId::nback, "Yes. Wait, no.", "No"},
    {TaskId::nback, "Answer: YES", "Yes"},
    {TaskId::nback, "nope", ""},
    {TaskId::dcigt, "AAA", "AAA"},
    {TaskId::dcigt, "I choose DDD.", "DDD"},
    {TaskId::dcigt, "ccc", "CCC"},
    {TaskId::dcigt, "BBB lost big; DDD", "DDD"},
    {TaskId::dcigt, "deck A", ""},
    {TaskId::dcigt, "AAAA", ""},
    {TaskId::dcigt, "Stick with CCC", "CCC"},
    {TaskId::dcigt, "Final: BBB", "BBB"},
    {TaskId::wcst, "triangle red 1", "triangle red 1"},
    {TaskId::wcst, "cross green 2", "cross green 2"},
    {TaskId::wcst, "I match by color: star blue 4", "star blue 4"},
    {TaskId::wcst, "Circle Yellow 3.", "circle yellow 3"},
    {TaskId::wcst, "triangle red 1 or cross green 2? cross green 2", "cross green 2"},
    {TaskId::wcst, "triangle", ""},
    {TaskId::wcst, "red 1", ""},
    {TaskId::wcst, "star blue 3", ""},
    {TaskId::wcst, "banana", ""},
    {TaskId::wcst, "first: circle yellow 3 then triangle red 1", "triangle red 1"},
    {TaskId::prlt, "left arm\nright arm\nleft arm", "left arm"},
    {TaskId::wpt, "rainy? sunny? rainy.", "rainy"},
};

TEST_CASE("parser agrees with 50 hand-labelled replies") {
  static_assert(std::size(kParseSet) == 50);
  int agree = 0;
  for (const auto& l : kParseSet) {
    const auto got = parse_choice(l.task, l.reply);
    const std::string g = got.value_or("");
    CHECK_MESSAGE(g == std::string(l.expected), to_string(l.task), ": ", std::string(l.reply));
    agree += g == l.expected;
  }
  CHECK(agree == 50);
}

TEST_CASE("parse is idempotent on extracted tokens") {
  for (const auto& l : kParseSet) {
    const auto got = parse_choice(l.task, l.reply);
    if (got) CHECK(parse_choice(l.task, *got) == got);
  }
}

TEST_CASE("retry instruction lists the options") {
  std::vector<std::string> opts = {"left arm", "right arm"};
  CHECK(retry_instruction(opts) == "Respond with exactly one of: left arm, right arm.");
}

TEST_CASE("transcript jsonl round-trip") {
  auto agent = make_baseline("wsls");
  const auto t = testing::play(preset(TaskId::prlt, Difficulty::easy), *agent, 7);
  const auto text = testing::dump(t);
  std::istringstream in(text);
  const auto back = read_jsonl(in);
  CHECK(testing::dump(back) == text);
  CHECK(back.records.size() == 40);
  CHECK(back.score->score == t.score->score);
}

TEST_CASE("structure validation names the gap") {
  auto agent = make_baseline("random");
  auto t = testing::play(preset(TaskId::prlt, Difficulty::easy), *agent, 3);
  t.records.erase(t.records.begin() + 9);
  try {
    validate_structure(t);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.record_index() == 10);
  }
}

TEST_CASE("malformed jsonl is a validation error") {
  std::istringstream junk("{\"not\": \"a transcript\"}\n");
  CHECK_THROWS_AS(read_jsonl(junk), ValidationError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_jsonl(empty), ValidationError);
}
