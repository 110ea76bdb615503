#pragma once

// Estimator-quality studies on synthetic Dirichlet models.
//
// Seed splitting: model draw d of setting (width, depth) uses
//   derive_seed(master, kModelStream, width, depth, d)
// and Monte Carlo run r at temperature tau uses
//   derive_seed(master, kRunStream, width, depth, d, r, bits(tau)).
// A run's stream never depends on how many runs, draws or settings are
// requested, so adding runs leaves earlier runs untouched. Each run draws
// max(N) samples once; the estimate for a smaller N uses its first N samples.
//
// Work is parallelized over (draw, run) with OpenMP. Every run writes into its
// own slot and aggregation walks slots in (draw, run) order, so output is
// bitwise identical for any thread count and for Execution::Serial, which runs
// the jobs one after another. Exact statistics always come from exact_stats,
// itself thread-count invariant.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "seqscore/synthdist.hpp"

namespace seqscore {

enum class Execution { Serial, Parallel };

inline constexpr std::uint64_t kModelStream = 0x6d6f64656cULL;  // "model"
inline constexpr std::uint64_t kRunStream = 0x72756eULL;        // "run"

/// Sets the OpenMP thread count for subsequent parallel regions (n >= 1).
void set_thread_count(int n);
int thread_count();

/// 1, 2, ..., n.
std::vector<std::size_t> iota_counts(std::size_t n);

struct StudyGrid {
  std::vector<DirichletSpec> specs;  // one per vocabulary width
  std::vector<std::size_t> depths{2, 3, 4};
  std::size_t draws = 1;  // model draws per (spec, depth)
  std::size_t runs = 1000;
  /// Every run gets its own model draw (draws := runs, one run per draw).
  bool resample_model = false;
  std::uint64_t master_seed = 0;
  EnumerationBudget budget;
};

/// Preset specs for the given widths.
std::vector<DirichletSpec> preset_specs(const std::vector<std::size_t>& widths);

std::uint64_t model_seed(std::uint64_t master, std::size_t width, std::size_t depth, std::size_t draw) noexcept;
std::uint64_t run_seed(std::uint64_t master, std::size_t width, std::size_t depth, std::size_t draw,
                       std::size_t run, double temperature) noexcept;

struct EntropyStudyConfig {
  StudyGrid grid;
  std::vector<std::size_t> sample_counts = iota_counts(30);
  std::vector<double> temperatures{1.0, 0.5};
};

struct EntropyRow {
  std::size_t width;
  std::size_t depth;
  std::string strategy;  // "ms"
  double temperature;
  std::size_t n_samples;
  double mean_est;
  double std_est;  // sample standard deviation over all (draw, run) estimates
  double exact_entropy;  // mean over draws
  std::size_t count;  // number of estimates aggregated
};

/// Monte Carlo predictive entropy estimates from multinomial samples against
/// the exact entropy of each model.
std::vector<EntropyRow> entropy_study(const EntropyStudyConfig& config, Execution exec = Execution::Parallel);

struct MaxLikStudyConfig {
  StudyGrid grid;
  std::vector<std::size_t> beam_widths = iota_counts(30);
  std::vector<std::size_t> sample_counts = iota_counts(30);
  std::vector<double> temperatures{0.5, 1.0};
};

struct MaxLikRow {
  std::size_t width;
  std::size_t depth;
  std::string strategy;  // "beam" or "ms"
  double param;          // beam width or temperature
  std::size_t n;         // beam width or number of samples
  double median_gap;     // best found log-prob minus exact max; <= 0
  double q05;
  double q95;
  double hit_rate;  // fraction with gap == 0
  std::size_t count;
};

/// Maximum-sequence-likelihood search quality: best-of-beam and best-of-N
/// multinomial samples against the exact maximum.
std::vector<MaxLikRow> maxlik_study(const MaxLikStudyConfig& config, Execution exec = Execution::Parallel);

/// Linear-interpolation quantile (numpy default) of unsorted data; q in [0, 1].
double quantile(std::vector<double> values, double q);

void write_entropy_csv(const std::vector<EntropyRow>& rows, std::ostream& out);
void write_maxlik_csv(const std::vector<MaxLikRow>& rows, std::ostream& out);

}  // namespace seqscore
