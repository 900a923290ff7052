#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "reflect/oddball.hpp"
#include "support.hpp"

using namespace reflect;
using namespace reflect::oddball;

namespace {

const std::string kStandard = preset(TaskId::oddball, Difficulty::easy).option("standard_sentence");

class FailingEmbedder : public Embedder {
 public:
  std::string name() const override { return "failing"; }
  std::vector<std::vector<double>> embed(std::span<const std::string>) override {
    throw TransportError("embedding service down", 3);
  }
};

}  // namespace

TEST_CASE("sentence splitting") {
  CHECK(split_sentences("A. B! C?").size() == 3);
  CHECK(split_sentences("wait, what's with the bananas? That seems out of place.").size() == 2);
  CHECK(split_sentences("no punctuation").size() == 1);
  CHECK(split_sentences("Dr. Smith arrived. He sat.").size() == 2);
  CHECK(split_sentences("").empty());
  const auto s = split_sentences("\"Really?\" she asked. Yes.");
  CHECK(s.size() == 3);
}

TEST_CASE("surprise of the standard sentence itself is 100") {
  HashEmbedder e;
  CHECK(score_surprise(kStandard, kStandard, e).score == doctest::Approx(100.0));
}

TEST_CASE("orthogonal vectors score 0") {
  HashEmbedder e;
  std::vector<double> a(8, 0.0), b(8, 0.0);
  a[0] = 1.0;
  b[1] = 2.0;
  CHECK(cosine(a, b) == 0.0);
  CHECK(cosine(a, std::vector<double>(8, 0.0)) == 0.0);
  CHECK(score_surprise("", kStandard, e).score == 0.0);
}

TEST_CASE("annotated examples order under the hash embedder") {
  HashEmbedder e;
  const auto& ex = annotated_examples();
  REQUIRE(ex.size() == 4);
  std::vector<double> s;
  for (const auto& a : ex) s.push_back(score_surprise(a.text, kStandard, e).score);
  CHECK(s[3] > s[0]);
  for (int i = 0; i + 1 < 4; ++i) CHECK_MESSAGE(s[i] < s[i + 1], "level ", i, " vs ", i + 1);
}

TEST_CASE("score is order-free and monotone in appended sentences") {
  HashEmbedder e;
  const auto& ex = annotated_examples();
  for (const auto& a : ex) {
    auto parts = split_sentences(a.text);
    const double base = score_surprise(a.text, kStandard, e).score;
    std::reverse(parts.begin(), parts.end());
    std::string rev;
    for (const auto& p : parts) rev += p + " ";
    CHECK(score_surprise(rev, kStandard, e).score == doctest::Approx(base));
    for (const auto& extra : {"That seems odd.", "Bananas are yellow.", "Nice."}) {
      CHECK(score_surprise(a.text + " " + extra, kStandard, e).score >= base - 1e-12);
    }
  }
}

TEST_CASE("pearson") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v - 7.0);
  CHECK(pearson(x, y) == doctest::Approx(1.0));
  std::vector<double> neg;
  for (double v : x) neg.push_back(-v);
  CHECK(pearson(x, neg) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(pearson(x, std::vector<double>(5, 1.0)), std::invalid_argument);
}

TEST_CASE("validate_scoring aggregates groups") {
  std::vector<double> a, h;
  for (int i = 0; i < 40; ++i) {
    a.push_back(i);
    h.push_back(2 * i + 1);
  }
  CHECK(validate_scoring(a, h, 10) == doctest::Approx(1.0));
  CHECK_THROWS_AS(validate_scoring(std::span(a).first(15), std::span(h).first(15), 10), std::invalid_argument);
}

TEST_CASE("shuffled labels give small correlations") {
  // 1000 permutations of 300 pairs in 30 groups
  Rng rng(4);
  std::vector<double> a, h;
  for (int i = 0; i < 300; ++i) {
    a.push_back(rng.uniform() * 100);
    h.push_back(static_cast<double>(rng.below(4)));
  }
  std::vector<double> rs;
  for (int k = 0; k < 1000; ++k) {
    rng.shuffle(std::span(h));
    rs.push_back(std::abs(validate_scoring(a, h, 10)));
  }
  std::sort(rs.begin(), rs.end());
  const double p95 = rs[949];
  MESSAGE("permutation |r| 95th percentile: ", p95);
  CHECK(p95 < 0.5);
}

TEST_CASE("built-in corpus") {
  const auto& c = builtin_corpus();
  CHECK(c.size() == 10);
  for (const auto& item : c) CHECK_NOTHROW(check_item(item));
  const auto& wall = c.front();
  CHECK(wall.deviant == 5);
  CHECK(wall.deviant_sentence().find("Bananas") != std::string::npos);
  auto bad = wall;
  bad.deviant = 1;
  CHECK_THROWS_AS(check_item(bad), ConfigError);
  bad.deviant = 8;
  CHECK_THROWS_AS(check_item(bad), ConfigError);
}

TEST_CASE("moving the deviant keeps the topic sentences in order") {
  const auto& item = builtin_corpus()[1];
  std::vector<std::string> topic;
  for (int i = 0; i < kSentences; ++i)
    if (i + 1 != item.deviant) topic.push_back(item.sentences[i]);
  for (int pos = kMinDeviant; pos <= kMaxDeviant; ++pos) {
    const auto moved = with_deviant_at(item, pos);
    CHECK(moved.deviant == pos);
    CHECK(moved.deviant_sentence() == item.deviant_sentence());
    std::vector<std::string> rest;
    for (int i = 0; i < kSentences; ++i)
      if (i + 1 != pos) rest.push_back(moved.sentences[i]);
    CHECK(rest == topic);
  }
}

TEST_CASE("corpus file round-trip") {
  testing::TempDir dir("corpus");
  const auto path = dir.path / "corpus.jsonl";
  save_corpus(builtin_corpus(), path);
  const auto back = load_corpus(path);
  REQUIRE(back.size() == builtin_corpus().size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].sentences == builtin_corpus()[i].sentences);
    CHECK(back[i].deviant == builtin_corpus()[i].deviant);
  }
  std::ofstream(dir.path / "bad.jsonl") << "{\"id\":\"x\",\"topic\":\"t\",\"sentences\":[\"a\"],\"deviant_index\":2}\n";
  CHECK_THROWS_AS(load_corpus(dir.path / "bad.jsonl"), ConfigError);
}

TEST_CASE("randomized deviants stay in range and depend on the seed") {
  auto cfg = preset(TaskId::oddball, Difficulty::easy);
  std::set<int> seen;
  for (std::uint64_t s = 0; s < 20; ++s) {
    OddballTask task(cfg, s);
    for (const auto& item : task.items()) {
      CHECK(item.deviant >= 2);
      CHECK(item.deviant <= 7);
      seen.insert(item.deviant);
    }
  }
  CHECK(seen.size() == 6);
  apply_override(cfg, "randomize_deviant", "0");
  OddballTask fixed(cfg, 1);
  CHECK(fixed.items().front().deviant == 5);
}

TEST_CASE("each item is its own conversation") {
  class Recorder : public Agent {
   public:
    std::vector<std::size_t> sizes;
    std::string name() const override { return "recorder"; }
    AgentReply respond(std::span<const ChatMessage> m, const AgentContext&) override {
      sizes.push_back(m.size());
      return {"Interesting."};
    }
  } agent;
  const auto t = testing::play(preset(TaskId::oddball, Difficulty::easy), agent, 1);
  CHECK(t.records.size() == 10);
  for (auto s : agent.sizes) CHECK(s == 2);
  for (const auto& r : t.records) CHECK(r.feedback.empty());
}

TEST_CASE("empty replies score 0; the oracle scores 100") {
  const auto cfg = preset(TaskId::oddball, Difficulty::easy);
  CHECK(testing::play(cfg, "oracle", 2).score->score == doctest::Approx(100.0));
  const auto t = testing::play(cfg, "constant:   ", 2);
  for (const auto& r : t.records) CHECK_FALSE(r.valid);
  CHECK(t.score->score == 0.0);
}

TEST_CASE("embedder failures leave items unscored with a warning") {
  const auto t = testing::play(preset(TaskId::oddball, Difficulty::easy), "random", 3);
  FailingEmbedder failing;
  const auto s = oddball::score_transcript(t, &failing);
  CHECK(s.metrics["unscored"] == 10);
  CHECK(s.metrics["warnings"].size() == 10);
  CHECK(s.score == 0.0);
}

TEST_CASE("remote-embedded transcripts reuse stored item scores") {
  auto t = testing::play(preset(TaskId::oddball, Difficulty::easy), "oracle", 3);
  t.config.options["embedder"] = "remote";
  t.score->metrics["item_scores"][0] = 42.0;
  const auto s = oddball::score_transcript(t);
  CHECK(s.metrics["item_scores"][0] == 42.0);
  t.score->metrics.erase("item_scores");
  CHECK_THROWS_AS(oddball::score_transcript(t), ValidationError);
}
