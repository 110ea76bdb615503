#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "seqscore/decode.hpp"
#include "seqscore/errors.hpp"
#include "seqscore/synthdist.hpp"
#include "test_support.hpp"

using namespace seqscore;
using seqscore::testing::brute_force;
using seqscore::testing::one_hot_model;
using seqscore::testing::toy_model;

namespace {

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

// Closed-form probability of [0,0] when every step is tempered at tau.
double tempered_zero_zero(double tau) {
  const double a = std::pow(0.6, 1 / tau), b = std::pow(0.4, 1 / tau);
  const double c = std::pow(0.7, 1 / tau), d = std::pow(0.3, 1 / tau);
  return a / (a + b) * c / (c + d);
}

}  // namespace

TEST_CASE("greedy examples") {
  const auto toy = greedy(toy_model());
  CHECK(toy.tokens() == std::vector<TokenId>{0, 0});
  CHECK(std::abs(toy.total_log_prob() - std::log(0.42)) < 1e-14);

  const auto hot = greedy(one_hot_model(6, {5, 2, 2, 1}));
  CHECK(hot.tokens() == std::vector<TokenId>{5, 2, 2, 1});
  CHECK(hot.total_log_prob() == 0.0);

  const auto uni = greedy(UniformSource(Vocab(5), 3));
  CHECK(uni.tokens() == std::vector<TokenId>{0, 0, 0});
  CHECK(uni.total_log_prob() == doctest::Approx(-3 * std::log(5.0)).epsilon(1e-14));

  CHECK(greedy(toy_model(), 1).tokens() == std::vector<TokenId>{0});
}

TEST_CASE("beam examples") {
  const auto toy = beam_search(toy_model(), 4);
  REQUIRE(toy.size() == 4);
  CHECK(toy[0].tokens() == std::vector<TokenId>{0, 0});
  CHECK(toy[0].total_log_prob() == exact_stats(toy_model()).max_log_prob);
  // 10 and 11 tie at 0.2: the lexicographically smaller one ranks first
  CHECK(toy[1].tokens() == std::vector<TokenId>{1, 0});
  CHECK(toy[2].tokens() == std::vector<TokenId>{1, 1});
  CHECK(toy[3].tokens() == std::vector<TokenId>{0, 1});
  for (std::size_t i = 1; i < toy.size(); ++i) CHECK(toy[i - 1].total_log_prob() >= toy[i].total_log_prob());

  CHECK_THROWS_AS(beam_search(toy_model(), 0), InputError);
}

TEST_CASE("beam width 1 is greedy") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto model = sample_model(DirichletSpec::preset(20), 4, s);
    const auto g = greedy(model);
    const auto b = beam_search(model, 1);
    REQUIRE(b.size() == 1);
    CHECK(b[0].tokens() == g.tokens());
    CHECK(b[0].total_log_prob() == g.total_log_prob());
  }
}

TEST_CASE("beam bounds against the exact oracle") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto model = sample_model(DirichletSpec::preset(20), 4, 100 + s);
    const auto st = exact_stats(model);
    const double g = greedy(model).total_log_prob();
    const double b5 = beam_search(model, 5)[0].total_log_prob();
    CAPTURE(s);
    CHECK(g <= st.max_log_prob);
    CHECK(b5 <= st.max_log_prob);
    CHECK(b5 >= g);
  }
}

TEST_CASE("exhaustive beam width recovers the maximum") {
  for (std::uint64_t s = 0; s < 25; ++s) {
    const std::size_t v = 2 + s % 4;
    const std::size_t t = 1 + s % 3;
    const auto model = sample_model(DirichletSpec{std::vector<double>(v, 0.3)}, t, s);
    const auto bf = brute_force(model);
    const auto best = beam_search(model, ipow(v, t - 1))[0];
    CAPTURE(s);
    CHECK(std::abs(best.total_log_prob() - bf.max_log_prob) < 1e-12);
    CHECK(best.tokens() == bf.argmax);
  }
}

TEST_CASE("decoded sequences rescore to their stored totals") {
  const auto model = sample_model(DirichletSpec::preset(20), 3, 9);
  std::vector<ScoredSequence> all = beam_search(model, 7);
  const auto ms = multinomial_sample(model, 0.8, 5, 50);
  all.insert(all.end(), ms.begin(), ms.end());
  all.push_back(greedy(model));
  for (const auto& s : all) {
    CHECK(std::abs(sequence_log_prob(model, s.tokens()) - s.total_log_prob()) < 1e-12);
  }
}

TEST_CASE("multinomial examples") {
  SUBCASE("tiny temperature is greedy") {
    for (const auto& s : multinomial_sample(toy_model(), 1e-6, 3, 200)) {
      CHECK(s.tokens() == std::vector<TokenId>{0, 0});
    }
  }
  SUBCASE("tau 1 frequencies") {
    const std::size_t n = 100000;
    const auto samples = multinomial_sample(toy_model(), 1.0, 17, n);
    std::map<std::vector<TokenId>, std::size_t> freq;
    for (const auto& s : samples) ++freq[s.tokens()];
    CHECK(std::abs(static_cast<double>(freq[{0, 0}]) / n - 0.42) < 0.01);
    CHECK(std::abs(static_cast<double>(freq[{0, 1}]) / n - 0.18) < 0.01);
  }
  SUBCASE("tau 1.5 flattens") {
    const std::size_t n = 100000;
    auto top = [&](double tau) {
      std::map<std::vector<TokenId>, std::size_t> freq;
      for (const auto& s : multinomial_sample(toy_model(), tau, 23, n)) ++freq[s.tokens()];
      std::size_t m = 0;
      for (const auto& [k, c] : freq) m = std::max(m, c);
      return static_cast<double>(m) / n;
    };
    const double f15 = top(1.5);
    CHECK(f15 < top(1.0));
    CHECK(std::abs(f15 - tempered_zero_zero(1.5)) < 0.01);
  }
  SUBCASE("recorded log-probs are untempered") {
    for (const auto& s : multinomial_sample(toy_model(), 3.0, 1, 100)) {
      CHECK(std::abs(s.total_log_prob() - sequence_log_prob(toy_model(), s.tokens())) < 1e-15);
    }
  }
}

TEST_CASE("multinomial is reproducible and seed-sensitive") {
  const auto model = sample_model(DirichletSpec::preset(100), 3, 2);
  const auto a = multinomial_sample(model, 0.5, 77, 30);
  const auto b = multinomial_sample(model, 0.5, 77, 30);
  const auto c = multinomial_sample(model, 0.5, 78, 30);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].tokens() == b[i].tokens());
    CHECK(a[i].token_log_probs() == b[i].token_log_probs());
    differs = differs || a[i].tokens() != c[i].tokens();
  }
  CHECK(differs);
}

TEST_CASE("decode errors and config") {
  CHECK_THROWS_AS(multinomial_sample(toy_model(), 0.0, 1, 1), InputError);
  CHECK_THROWS_AS(multinomial_sample(toy_model(), -1.0, 1, 1), InputError);
  CHECK_THROWS_AS(multinomial_sample(toy_model(), 1.0, 1, 0), InputError);
  CHECK_THROWS_AS(greedy(toy_model(), 3), InputError);

  const auto cfg = make_decode_config("beam", 3, 1.0, 0, 2);
  REQUIRE(std::holds_alternative<BeamDecode>(cfg.strategy));
  CHECK(std::get<BeamDecode>(cfg.strategy).width == 3);
  CHECK(decode(toy_model(), cfg).size() == 3);
  CHECK(std::holds_alternative<MultinomialDecode>(make_decode_config("ms", 1, 0.5, 9, 0).strategy));
  CHECK(decode(toy_model(), make_decode_config("multinomial", 1, 1.0, 4, 0), 6).size() == 6);
  CHECK(decode(toy_model(), make_decode_config("greedy", 1, 1.0, 0, 0))[0].tokens() == std::vector<TokenId>{0, 0});
  CHECK_THROWS(make_decode_config("nucleus", 1, 1.0, 0, 0));
}
