#include <doctest.h>

#include "reflect/nback.hpp"
#include "support.hpp"

using namespace reflect;
using namespace reflect::nback;

namespace {

std::vector<Label> constant(Label l, const Sequence& s) { return std::vector<Label>(s.letters.size(), l); }

}  // namespace

TEST_CASE("generated sequences carry exactly the requested matches") {
  Rng rng(1);
  for (int m : {0, 5, 10, 24}) {
    const auto s = generate_sequence(2, 26, m, rng);
    const auto labels = labels_for(s.letters, 2);
    CHECK(labels == s.expected);
    int yes = 0, no = 0;
    for (std::size_t i = 2; i < labels.size(); ++i) (labels[i] == Label::yes ? yes : no)++;
    CHECK(yes == m);
    CHECK(yes + no == 24);
    CHECK(labels[0] == Label::not_available);
    CHECK(labels[1] == Label::not_available);
  }
  CHECK_THROWS_AS(generate_sequence(2, 26, 25, rng), ConfigError);
}

TEST_CASE("labels by definition") {
  const std::vector<char> s = {'E', 'F', 'E', 'G'};
  const auto l = labels_for(s, 2);
  CHECK(l[2] == Label::yes);
  CHECK(l[3] == Label::no);
}

TEST_CASE("default sequence baselines") {
  const auto cfg = preset(TaskId::nback, Difficulty::easy);
  const auto s = sequence_for(cfg, 0);
  CHECK(s.letters.size() == 26);
  CHECK(score(s.expected, s).score == 100.0);
  CHECK(score(constant(Label::no, s), s).score == doctest::Approx(100.0 * 14 / 24));
  CHECK(score(constant(Label::yes, s), s).score == doctest::Approx(100.0 * 10 / 24));
  // fixed: every session sees the same letters
  CHECK(sequence_for(cfg, 123).letters == s.letters);
}

TEST_CASE("all-no plus all-yes is 100 on any sequence") {
  Rng rng(77);
  for (int k = 0; k < 50; ++k) {
    const int n = 1 + static_cast<int>(rng.below(4));
    const int len = n + 5 + static_cast<int>(rng.below(30));
    const int m = static_cast<int>(rng.below(len - n + 1));
    const auto s = generate_sequence(n, len, m, rng);
    CHECK(score(constant(Label::no, s), s).score + score(constant(Label::yes, s), s).score ==
          doctest::Approx(100.0));
  }
}

TEST_CASE("first-n answers do not move the score") {
  const auto s = sequence_for(preset(TaskId::nback, Difficulty::hard), 0);
  auto a = s.expected;
  const double base = score(a, s).score;
  for (int i = 0; i < s.n; ++i) a[i] = Label::yes;
  CHECK(score(a, s).score == base);
  CHECK(score(a, s).na_compliant == 0);
  CHECK(score(s.expected, s).na_compliant == s.n);
}

TEST_CASE("sessions: perfect, all-no, fallback") {
  const auto cfg = preset(TaskId::nback, Difficulty::easy);
  CHECK(testing::play(cfg, "oracle", 1).score->score == 100.0);
  CHECK(testing::play(cfg, "all_no", 1).score->score == doctest::Approx(58.333333333));
  const auto t = testing::play(cfg, "constant:hmm", 1);
  for (const auto& r : t.records) CHECK(r.action == "No");
  CHECK(t.score->score == doctest::Approx(58.333333333));
}
