#include <doctest.h>

#include <cmath>
#include <bit>
#include <cstring>
#include <stdexcept>
#include <sstream>
#include <string>
#include <vector>

#include "seqscore/decode.hpp"
#include "seqscore/errors.hpp"
#include "seqscore/rng.hpp"
#include "seqscore/study.hpp"

using namespace seqscore;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

StudyGrid small_grid(std::size_t runs) {
  StudyGrid g;
  g.specs = preset_specs({20});
  g.depths = {2, 3};
  g.runs = runs;
  g.master_seed = 2024;
  return g;
}

// MC estimate of run r of draw d, following the documented seed scheme.
double manual_estimate(const StudyGrid& g, std::size_t depth, std::size_t d, std::size_t r, double tau,
                       std::size_t n) {
  const std::size_t w = g.specs[0].vocab_size();
  const SyntheticModel model(g.specs[0], depth, derive_seed(g.master_seed, kModelStream, w, depth, d));
  const std::uint64_t seed = derive_seed(g.master_seed, kRunStream, w, depth, d, r, std::bit_cast<std::uint64_t>(tau));
  double nll = 0.0;
  for (const auto& s : multinomial_sample(model, tau, seed, n)) nll -= s.total_log_prob();
  return nll / static_cast<double>(n);
}

const EntropyRow& find(const std::vector<EntropyRow>& rows, std::size_t depth, double tau, std::size_t n) {
  for (const auto& r : rows) {
    if (r.depth == depth && r.temperature == tau && r.n_samples == n) return r;
  }
  throw std::runtime_error("row not found");
}

}  // namespace

TEST_CASE("quantile matches numpy linear interpolation") {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(quantile(v, 0.05) == doctest::Approx(1.15));
  CHECK(quantile(v, 0.95) == doctest::Approx(3.85));
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK(quantile({7.0}, 0.3) == 7.0);
  CHECK_THROWS_AS(quantile({}, 0.5), InputError);
}

TEST_CASE("seed scheme") {
  CHECK(model_seed(1, 20, 3, 0) == derive_seed(1, kModelStream, 20, 3, 0));
  CHECK(model_seed(1, 20, 3, 0) != model_seed(1, 20, 3, 1));
  CHECK(run_seed(1, 20, 3, 0, 0, 1.0) != run_seed(1, 20, 3, 0, 0, 0.5));
  CHECK(run_seed(1, 20, 3, 0, 0, 1.0) != run_seed(1, 20, 3, 0, 1, 1.0));
  CHECK(run_seed(1, 20, 3, 0, 0, 1.0) != run_seed(2, 20, 3, 0, 0, 1.0));
}

TEST_CASE("entropy study follows the documented seeds, and adding runs keeps earlier runs") {
  EntropyStudyConfig cfg;
  cfg.grid = small_grid(1);
  cfg.grid.depths = {2};
  cfg.sample_counts = {1, 4, 7};
  cfg.temperatures = {1.0};
  const auto one = entropy_study(cfg);
  CHECK(same_bits(find(one, 2, 1.0, 4).mean_est, manual_estimate(cfg.grid, 2, 0, 0, 1.0, 4)));
  CHECK(same_bits(find(one, 2, 1.0, 7).mean_est, manual_estimate(cfg.grid, 2, 0, 0, 1.0, 7)));

  cfg.grid.runs = 3;
  const auto three = entropy_study(cfg);
  double sum = 0.0;
  for (std::size_t r = 0; r < 3; ++r) sum += manual_estimate(cfg.grid, 2, 0, r, 1.0, 4);
  CHECK(find(three, 2, 1.0, 4).mean_est == doctest::Approx(sum / 3).epsilon(1e-14));
  CHECK(find(three, 2, 1.0, 4).count == 3);

  cfg.grid.draws = 2;
  cfg.grid.runs = 2;
  const auto draws = entropy_study(cfg);
  double s2 = 0.0;
  for (std::size_t d = 0; d < 2; ++d) {
    for (std::size_t r = 0; r < 2; ++r) s2 += manual_estimate(cfg.grid, 2, d, r, 1.0, 1);
  }
  CHECK(find(draws, 2, 1.0, 1).mean_est == doctest::Approx(s2 / 4).epsilon(1e-14));

  cfg.grid.resample_model = true;
  cfg.grid.runs = 4;
  const auto resampled = entropy_study(cfg);
  double s3 = 0.0;
  for (std::size_t d = 0; d < 4; ++d) s3 += manual_estimate(cfg.grid, 2, d, 0, 1.0, 7);
  CHECK(find(resampled, 2, 1.0, 7).mean_est == doctest::Approx(s3 / 4).epsilon(1e-14));
  CHECK(find(resampled, 2, 1.0, 7).count == 4);
}

TEST_CASE("serial and parallel execution are bitwise identical") {
  const int saved = thread_count();
  set_thread_count(3);

  EntropyStudyConfig ecfg;
  ecfg.grid = small_grid(40);
  ecfg.grid.draws = 2;
  ecfg.sample_counts = {1, 5, 10};
  const auto es = entropy_study(ecfg, Execution::Serial);
  const auto ep = entropy_study(ecfg, Execution::Parallel);
  REQUIRE(es.size() == ep.size());
  for (std::size_t i = 0; i < es.size(); ++i) {
    CHECK(same_bits(es[i].mean_est, ep[i].mean_est));
    CHECK(same_bits(es[i].std_est, ep[i].std_est));
    CHECK(same_bits(es[i].exact_entropy, ep[i].exact_entropy));
  }

  MaxLikStudyConfig mcfg;
  mcfg.grid = small_grid(30);
  mcfg.grid.resample_model = true;
  mcfg.beam_widths = {1, 2, 5};
  mcfg.sample_counts = {1, 10};
  const auto ms = maxlik_study(mcfg, Execution::Serial);
  const auto mp = maxlik_study(mcfg, Execution::Parallel);
  REQUIRE(ms.size() == mp.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    CHECK(same_bits(ms[i].median_gap, mp[i].median_gap));
    CHECK(same_bits(ms[i].q05, mp[i].q05));
    CHECK(same_bits(ms[i].hit_rate, mp[i].hit_rate));
  }

  std::ostringstream a, b;
  write_maxlik_csv(ms, a);
  write_maxlik_csv(mp, b);
  CHECK(a.str() == b.str());
  set_thread_count(saved);
}

TEST_CASE("entropy study statistics at |V| = 20, T = 2") {
  EntropyStudyConfig cfg;
  cfg.grid = small_grid(1000);
  cfg.grid.depths = {2};
  cfg.sample_counts = iota_counts(30);
  cfg.temperatures = {1.0, 0.5};
  const auto rows = entropy_study(cfg);
  CHECK(rows.size() == 60);

  const auto& t1 = find(rows, 2, 1.0, 30);
  const auto& t05 = find(rows, 2, 0.5, 30);
  const double se1 = t1.std_est / std::sqrt(1000.0);
  const double se05 = t05.std_est / std::sqrt(1000.0);
  CHECK(std::abs(t1.mean_est - t1.exact_entropy) <= 3 * se1);
  CHECK(t05.std_est < t1.std_est);
  CHECK(std::abs(t05.mean_est - t05.exact_entropy) > 3 * se05);

  for (double tau : {1.0, 0.5}) {
    const double sd1 = find(rows, 2, tau, 1).std_est;
    for (std::size_t n = 2; n <= 30; ++n) CHECK(find(rows, 2, tau, n).std_est < sd1);
  }
}

TEST_CASE("max-likelihood study") {
  MaxLikStudyConfig cfg;
  cfg.grid = small_grid(50);
  cfg.grid.resample_model = true;
  cfg.beam_widths = {1, 20, 400};
  cfg.sample_counts = {1, 5, 30};
  cfg.temperatures = {0.5};
  const auto rows = maxlik_study(cfg);
  for (const auto& r : rows) {
    CHECK(r.median_gap <= 0.0);
    CHECK(r.q05 <= r.median_gap);
    CHECK(r.median_gap <= r.q95);
    CHECK(r.count == 50);
    // exhaustive beam: width |V|^(T-1)
    if (r.strategy == "beam" && r.n == 20 && r.depth == 2) CHECK(r.hit_rate == 1.0);
    if (r.strategy == "beam" && r.n == 400 && r.depth == 3) CHECK(r.hit_rate == 1.0);
  }
  // low temperature finds the maximum with few samples
  for (const auto& r : rows) {
    if (r.strategy == "ms" && r.n == 30) CHECK(r.hit_rate >= 0.9);
  }
}

TEST_CASE("study validation and CSV") {
  EntropyStudyConfig cfg;
  cfg.grid = small_grid(1);
  cfg.grid.specs = preset_specs({100});
  cfg.grid.depths = {4};
  cfg.grid.budget = EnumerationBudget{10'000'000};
  CHECK_THROWS_AS(entropy_study(cfg), ResourceError);

  cfg.grid = small_grid(1);
  cfg.temperatures = {0.0};
  CHECK_THROWS_AS(entropy_study(cfg), InputError);
  cfg.temperatures = {1.0};
  cfg.grid.runs = 0;
  CHECK_THROWS_AS(entropy_study(cfg), InputError);

  std::ostringstream e, m;
  write_entropy_csv({}, e);
  write_maxlik_csv({}, m);
  CHECK(e.str() == "width,depth,strategy,tau,N,mean_est,std_est,exact_entropy\n");
  CHECK(m.str() == "width,depth,strategy,param,N,median_gap,q05,q95,hit_rate\n");
}
