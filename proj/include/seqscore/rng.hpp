#pragma once

// Deterministic random streams.
//
// Every random quantity in the library is drawn from a SplitMix64 stream whose
// starting state is a hash of a stable key (master seed + indices or a token
// path). Distributions are implemented here rather than taken from <random>,
// whose distribution algorithms are implementation-defined and would make
// results differ between standard libraries.

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace seqscore {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 output finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Folds a list of 64-bit words into one key. Order-sensitive.
constexpr std::uint64_t hash_words(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = mix64(seed + kGoldenGamma);
  for (std::uint64_t w : words) h = mix64(h + (w + 1) * kGoldenGamma);
  return h;
}

/// Seed-splitting scheme: the stream for (master, tag, i0, i1, ...) depends only
/// on those values, never on how many siblings exist.
template <typename... Ix>
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, Ix... indices) noexcept {
  return hash_words(master, {tag, static_cast<std::uint64_t>(indices)...});
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe to take the log of.
  double uniform_pos() noexcept { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  /// Uniform integer on [0, n), by rejection of the biased low range.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Standard normal via the Marsaglia polar method (caches the second variate).
  double normal() noexcept;

  /// log of a Gamma(shape, 1) variate.
  ///
  /// shape >= 1: Marsaglia-Tsang squeeze/rejection.
  /// shape < 1:  Gamma(shape + 1) * U^(1/shape), evaluated in log space so tiny
  ///             shapes (0.2) never underflow to zero.
  double log_gamma(double shape) noexcept;

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::uint64_t SplitMix64::below(std::uint64_t n) noexcept {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % n;
  }
}

inline double SplitMix64::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

inline double SplitMix64::log_gamma(double shape) noexcept {
  if (shape < 1.0) {
    const double boosted = log_gamma(shape + 1.0);
    return boosted + std::log(uniform_pos()) / shape;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d) + std::log(v);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d) + std::log(v);
  }
}

}  // namespace seqscore
