#include "seqscore/study.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <optional>
#include <ostream>

#include "seqscore/decode.hpp"
#include "seqscore/errors.hpp"
#include "seqscore/rng.hpp"

namespace seqscore {

namespace {

struct Setting {
  const DirichletSpec* spec;
  std::size_t depth;
  std::size_t draws;
  std::size_t runs;
};

std::vector<Setting> expand(const StudyGrid& grid) {
  if (grid.specs.empty()) throw InputError("study needs at least one vocabulary spec");
  if (grid.depths.empty()) throw InputError("study needs at least one depth");
  if (grid.runs < 1) throw InputError("runs must be >= 1");
  if (grid.draws < 1) throw InputError("draws must be >= 1");
  std::vector<Setting> out;
  for (const auto& spec : grid.specs) {
    spec.validate();
    for (std::size_t depth : grid.depths) {
      if (depth < 1) throw InputError("depths must be >= 1");
      check_budget(spec.vocab_size(), depth, grid.budget);
      if (grid.resample_model) {
        out.push_back({&spec, depth, grid.runs, 1});
      } else {
        out.push_back({&spec, depth, grid.draws, grid.runs});
      }
    }
  }
  return out;
}

void check_counts(const std::vector<std::size_t>& counts, const char* what) {
  for (std::size_t n : counts) {
    if (n < 1) throw InputError(std::string(what) + " must be >= 1");
  }
}

void check_temperatures(const std::vector<double>& temps) {
  for (double t : temps) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InputError("temperatures must be > 0");
  }
}

/// Runs body(i) for i in [0, n), in parallel when requested. Exceptions are
/// captured per index and the first (lowest index) is rethrown.
template <typename Body>
void for_each_index(std::size_t n, Execution exec, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::int64_t>(n);
  const bool parallel = exec == Execution::Parallel;
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct DrawnModel {
  SyntheticModel model;
  ExactStats exact;
};

std::vector<DrawnModel> draw_models(const Setting& s, const StudyGrid& grid, Execution exec) {
  std::vector<std::optional<DrawnModel>> slots(s.draws);
  for_each_index(s.draws, exec, [&](std::size_t d) {
    SyntheticModel model(*s.spec, s.depth, model_seed(grid.master_seed, s.spec->vocab_size(), s.depth, d));
    ExactStats exact = exact_stats(model, grid.budget);
    slots[d].emplace(DrawnModel{std::move(model), std::move(exact)});
  });
  std::vector<DrawnModel> out;
  out.reserve(s.draws);
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void set_thread_count(int n) {
  if (n < 1) throw InputError("thread count must be >= 1");
  omp_set_num_threads(n);
}

int thread_count() { return omp_get_max_threads(); }

std::vector<std::size_t> iota_counts(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i + 1;
  return out;
}

std::vector<DirichletSpec> preset_specs(const std::vector<std::size_t>& widths) {
  std::vector<DirichletSpec> out;
  out.reserve(widths.size());
  for (std::size_t w : widths) out.push_back(DirichletSpec::preset(w));
  return out;
}

std::uint64_t model_seed(std::uint64_t master, std::size_t width, std::size_t depth, std::size_t draw) noexcept {
  return derive_seed(master, kModelStream, width, depth, draw);
}

std::uint64_t run_seed(std::uint64_t master, std::size_t width, std::size_t depth, std::size_t draw,
                       std::size_t run, double temperature) noexcept {
  return derive_seed(master, kRunStream, width, depth, draw, run, std::bit_cast<std::uint64_t>(temperature));
}

std::vector<EntropyRow> entropy_study(const EntropyStudyConfig& config, Execution exec) {
  check_counts(config.sample_counts, "sample counts");
  check_temperatures(config.temperatures);
  const auto settings = expand(config.grid);
  if (config.sample_counts.empty()) return {};
  const std::size_t max_n = *std::max_element(config.sample_counts.begin(), config.sample_counts.end());

  std::vector<EntropyRow> rows;
  for (const auto& s : settings) {
    const auto models = draw_models(s, config.grid, exec);
    double exact_mean = 0.0;
    for (const auto& m : models) exact_mean += m.exact.entropy_nats;
    exact_mean /= static_cast<double>(models.size());

    const std::size_t width = s.spec->vocab_size();
    const std::size_t jobs = s.draws * s.runs;
    for (double tau : config.temperatures) {
      // estimates[job * |counts| + k]
      std::vector<double> estimates(jobs * config.sample_counts.size());
      for_each_index(jobs, exec, [&](std::size_t job) {
        const std::size_t d = job / s.runs;
        const std::size_t r = job % s.runs;
        const auto samples = multinomial_sample(models[d].model, tau,
                                                run_seed(config.grid.master_seed, width, s.depth, d, r, tau), max_n);
        std::vector<double> prefix_nll(max_n + 1, 0.0);
        for (std::size_t n = 0; n < max_n; ++n) prefix_nll[n + 1] = prefix_nll[n] - samples[n].total_log_prob();
        for (std::size_t k = 0; k < config.sample_counts.size(); ++k) {
          const std::size_t n = config.sample_counts[k];
          estimates[job * config.sample_counts.size() + k] = prefix_nll[n] / static_cast<double>(n);
        }
      });
      for (std::size_t k = 0; k < config.sample_counts.size(); ++k) {
        std::vector<double> xs(jobs);
        for (std::size_t job = 0; job < jobs; ++job) xs[job] = estimates[job * config.sample_counts.size() + k];
        EntropyRow row{width, s.depth, "ms", tau, config.sample_counts[k], 0.0, 0.0, exact_mean, jobs};
        mean_std(xs, row.mean_est, row.std_est);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<MaxLikRow> maxlik_study(const MaxLikStudyConfig& config, Execution exec) {
  check_counts(config.sample_counts, "sample counts");
  check_counts(config.beam_widths, "beam widths");
  check_temperatures(config.temperatures);
  const auto settings = expand(config.grid);

  const auto summarize = [](MaxLikRow row, const std::vector<double>& gaps) {
    std::size_t hits = 0;
    for (double g : gaps) hits += g == 0.0 ? 1 : 0;
    row.median_gap = quantile(gaps, 0.5);
    row.q05 = quantile(gaps, 0.05);
    row.q95 = quantile(gaps, 0.95);
    row.hit_rate = static_cast<double>(hits) / static_cast<double>(gaps.size());
    row.count = gaps.size();
    return row;
  };

  std::vector<MaxLikRow> rows;
  for (const auto& s : settings) {
    const auto models = draw_models(s, config.grid, exec);
    const std::size_t width = s.spec->vocab_size();

    // Beam search is deterministic, so it is evaluated once per model draw.
    for (std::size_t bw : config.beam_widths) {
      std::vector<double> gaps(s.draws);
      for_each_index(s.draws, exec, [&](std::size_t d) {
        const auto beam = beam_search(models[d].model, bw);
        gaps[d] = beam.front().total_log_prob() - models[d].exact.max_log_prob;
      });
      rows.push_back(summarize({width, s.depth, "beam", static_cast<double>(bw), bw, 0, 0, 0, 0, 0}, gaps));
    }

    if (config.sample_counts.empty()) continue;
    const std::size_t max_n = *std::max_element(config.sample_counts.begin(), config.sample_counts.end());
    const std::size_t jobs = s.draws * s.runs;
    for (double tau : config.temperatures) {
      std::vector<double> gaps(jobs * config.sample_counts.size());
      for_each_index(jobs, exec, [&](std::size_t job) {
        const std::size_t d = job / s.runs;
        const std::size_t r = job % s.runs;
        const auto samples = multinomial_sample(models[d].model, tau,
                                                run_seed(config.grid.master_seed, width, s.depth, d, r, tau), max_n);
        std::vector<double> running_best(max_n);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t n = 0; n < max_n; ++n) {
          best = std::max(best, samples[n].total_log_prob());
          running_best[n] = best;
        }
        for (std::size_t k = 0; k < config.sample_counts.size(); ++k) {
          gaps[job * config.sample_counts.size() + k] =
              running_best[config.sample_counts[k] - 1] - models[d].exact.max_log_prob;
        }
      });
      for (std::size_t k = 0; k < config.sample_counts.size(); ++k) {
        std::vector<double> xs(jobs);
        for (std::size_t job = 0; job < jobs; ++job) xs[job] = gaps[job * config.sample_counts.size() + k];
        rows.push_back(summarize({width, s.depth, "ms", tau, config.sample_counts[k], 0, 0, 0, 0, 0}, xs));
      }
    }
  }
  return rows;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InputError("quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw InputError("quantile level must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

void write_entropy_csv(const std::vector<EntropyRow>& rows, std::ostream& out) {
  out << "width,depth,strategy,tau,N,mean_est,std_est,exact_entropy\n";
  for (const auto& r : rows) {
    out << r.width << ',' << r.depth << ',' << r.strategy << ',' << fmt(r.temperature) << ',' << r.n_samples << ','
        << fmt(r.mean_est) << ',' << fmt(r.std_est) << ',' << fmt(r.exact_entropy) << '\n';
  }
}

void write_maxlik_csv(const std::vector<MaxLikRow>& rows, std::ostream& out) {
  out << "width,depth,strategy,param,N,median_gap,q05,q95,hit_rate\n";
  for (const auto& r : rows) {
    out << r.width << ',' << r.depth << ',' << r.strategy << ',' << fmt(r.param) << ',' << r.n << ','
        << fmt(r.median_gap) << ',' << fmt(r.q05) << ',' << fmt(r.q95) << ',' << fmt(r.hit_rate) << '\n';
  }
}

}  // namespace seqscore
