#include <doctest.h>

#include <cmath>
#include <vector>

#include "seqscore/errors.hpp"
#include "seqscore/eval.hpp"
#include "seqscore/rng.hpp"

using namespace seqscore;

namespace {

// O(n^2) definition: P(incorrect scores higher than correct), ties count 1/2.
double pairwise_auroc(const std::vector<LabeledScore>& items) {
  double wins = 0.0;
  double pairs = 0.0;
  for (const auto& bad : items) {
    if (bad.correct) continue;
    for (const auto& good : items) {
      if (!good.correct) continue;
      pairs += 1.0;
      if (bad.score > good.score) wins += 1.0;
      else if (bad.score == good.score) wins += 0.5;
    }
  }
  return wins / pairs;
}

std::vector<LabeledScore> random_items(SplitMix64& rng, std::size_t n, std::size_t levels) {
  std::vector<LabeledScore> items;
  items.push_back({static_cast<double>(rng.below(levels)), true});
  items.push_back({static_cast<double>(rng.below(levels)), false});
  while (items.size() < n) items.push_back({static_cast<double>(rng.below(levels)) * 0.37, rng.below(3) == 0});
  return items;
}

std::vector<LabeledScore> ten_item_fixture() {
  std::vector<LabeledScore> items;
  for (int s = 1; s <= 8; ++s) items.push_back({static_cast<double>(s), s % 2 == 0});
  items.push_back({9.0, true});
  items.push_back({10.0, true});
  return items;
}

}  // namespace

TEST_CASE("squad_f1 examples") {
  CHECK(squad_f1("The cat", {"cat"}) == 1.0);
  CHECK(squad_f1("paris france", {"paris"}) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(squad_f1("", {"x"}) == 0.0);
  CHECK(squad_f1("the", {"a"}) == 1.0);
  CHECK(squad_f1("x", {"the"}) == 0.0);
  CHECK(squad_f1("red red blue", {"red blue blue"}) == doctest::Approx(2.0 / 3.0));
  CHECK(squad_f1("new york", {"boston", "New York!"}) == 1.0);
  CHECK_THROWS_AS(squad_f1("x", {}), InputError);

  CHECK(is_correct_f1("paris france", {"paris"}));
  CHECK(is_correct_f1("a b", {"b c"}));  // "b" vs "b c": F1 = 2/3
  CHECK_FALSE(is_correct_f1("x y", {"x z"}));  // exactly 0.5 is not above the threshold
  CHECK(is_correct_f1("x y", {"x z"}, F1Config{0.4}));
}

TEST_CASE("squad_f1 symmetric when precision equals recall") {
  CHECK(squad_f1("a1 b2 c3", {"b2 c3 d4"}) == squad_f1("b2 c3 d4", {"a1 b2 c3"}));
  CHECK(squad_f1("one two", {"two three"}) == doctest::Approx(0.5));
}

TEST_CASE("auroc examples") {
  CHECK(auroc(std::vector<LabeledScore>{{0.9, false}, {0.8, false}, {0.3, true}, {0.2, true}}) == 1.0);
  CHECK(auroc(std::vector<LabeledScore>{{0.5, false}, {0.5, true}, {0.5, true}, {0.5, false}}) == 0.5);
  CHECK(auroc(std::vector<LabeledScore>{{0.9, false}, {0.4, false}, {0.6, true}, {0.1, true}}) == 0.75);
  CHECK_THROWS_AS(auroc(std::vector<LabeledScore>{{0.1, true}, {0.2, true}}), EvaluationError);
  CHECK_THROWS_AS(auroc(std::vector<LabeledScore>{{NAN, true}, {0.2, false}}), EvaluationError);
}

TEST_CASE("auroc matches pairwise counting") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const auto items = random_items(rng, 2 + rng.below(60), 1 + rng.below(20));
    CHECK(auroc(items) == doctest::Approx(pairwise_auroc(items)).epsilon(1e-12));
  }
}

TEST_CASE("property: auroc invariances") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto items = random_items(rng, 2 + rng.below(40), 2 + rng.below(30));
    const double base = auroc(items);
    auto transformed = items;
    for (auto& it : transformed) it.score = std::exp(2.0 * it.score) + 5.0;
    CHECK(auroc(transformed) == doctest::Approx(base).epsilon(1e-12));
    auto flipped = items;
    for (auto& it : flipped) it.correct = !it.correct;
    CHECK(auroc(flipped) == doctest::Approx(1.0 - base).epsilon(1e-12));
  }
}

TEST_CASE("rejection accuracy examples") {
  const auto items = ten_item_fixture();
  CHECK(rejection_accuracy(items, 1.0) == 0.6);
  CHECK(rejection_accuracy(items, 0.8) == 0.5);

  std::vector<LabeledScore> perfect;
  for (int s = 1; s <= 10; ++s) perfect.push_back({static_cast<double>(s), s <= 8});
  CHECK(rejection_accuracy(perfect, 0.8) == 1.0);

  // at least one kept; ties keep input order
  CHECK(rejection_accuracy(std::vector<LabeledScore>{{1.0, false}, {1.0, true}}, 0.1) == 0.0);
  CHECK_THROWS_AS(rejection_accuracy({}, 0.8), EvaluationError);
  CHECK_THROWS_AS(rejection_accuracy(items, 0.0), InputError);
  CHECK_THROWS_AS(rejection_accuracy(items, 1.5), InputError);
}

TEST_CASE("property: full retention is plain accuracy") {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto items = random_items(rng, 2 + rng.below(30), 10);
    double correct = 0.0;
    for (const auto& it : items) correct += it.correct ? 1.0 : 0.0;
    CHECK(rejection_accuracy(items, 1.0) == doctest::Approx(correct / items.size()).epsilon(1e-15));
  }
}
