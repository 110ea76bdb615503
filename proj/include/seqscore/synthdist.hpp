#pragma once

// Synthetic autoregressive models whose per-node next-token distributions are
// Dirichlet draws, plus exhaustive-enumeration ground truth for them.
//
// Nodes are never materialized. The distribution at a prefix is regenerated on
// demand from a SplitMix64 stream keyed by hash(seed, prefix), so a model of
// width 100 and depth 4 (10^8 leaves) costs O(depth * width) memory and the
// result does not depend on visit order or thread count.

#include <cstdint>
#include <string>
#include <vector>

#include "seqscore/seqmodel.hpp"

namespace seqscore {

struct DirichletSpec {
  std::vector<double> alphas;
  /// Shuffle the alpha order independently at every node before drawing.
  bool shuffle = true;

  std::size_t vocab_size() const noexcept { return alphas.size(); }

  /// Zipf-like presets: width 20 -> {10, 10, 0.2 x 18};
  /// width 100 -> {10, 10, 1 x 4, 0.2 x 94}. Throws InputError for other widths.
  static DirichletSpec preset(std::size_t vocab_size);
  static bool has_preset(std::size_t vocab_size) noexcept;

  /// Throws InputError unless |alphas| >= 2 and every alpha is finite and > 0.
  void validate() const;

  friend bool operator==(const DirichletSpec&, const DirichletSpec&) = default;
};

class SyntheticModel final : public TokenDistributionSource {
 public:
  SyntheticModel(DirichletSpec spec, std::size_t depth, std::uint64_t seed);

  Vocab vocab() const override { return Vocab(spec_.vocab_size()); }
  std::size_t max_len() const override { return depth_; }
  TokenDistribution next(std::span<const TokenId> prefix) const override;

  /// Writes the node distribution for `prefix` into `out` (resized to |V|).
  void node_log_probs(std::span<const TokenId> prefix, std::vector<double>& out) const;

  const DirichletSpec& spec() const noexcept { return spec_; }
  std::size_t depth() const noexcept { return depth_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  DirichletSpec spec_;
  std::size_t depth_;
  std::uint64_t seed_;
};

/// Stream key of the node reached by `prefix`.
std::uint64_t node_key(std::uint64_t seed, std::span<const TokenId> prefix) noexcept;

SyntheticModel sample_model(const DirichletSpec& spec, std::size_t depth, std::uint64_t seed);

struct EnumerationBudget {
  std::uint64_t max_leaves = 100'000'000;
};

struct ExactStats {
  double entropy_nats = 0.0;
  double max_log_prob = 0.0;
  /// Lexicographically smallest sequence attaining max_log_prob.
  std::vector<TokenId> argmax_tokens;
  /// Kahan-summed probability mass of all leaves; should be 1.
  double total_mass = 0.0;
  std::uint64_t leaves = 0;
};

/// |V|^T, saturating at UINT64_MAX.
std::uint64_t leaf_count(std::size_t vocab_size, std::size_t depth) noexcept;

/// Throws ResourceError naming the required leaf count when over budget.
void check_budget(std::size_t vocab_size, std::size_t depth, const EnumerationBudget& budget);

/// Exhaustive enumeration of all |V|^T sequences of `source`.
///
/// Parallelized over first-token subtrees with OpenMP; partial sums are merged
/// in token order so the result is bitwise identical for any thread count.
ExactStats exact_stats(const TokenDistributionSource& source, const EnumerationBudget& budget = {});

/// Plain-text model config block (`key = value` lines, '#' comments).
/// Keys: vocab_size, preset (= zipf) | alphas (comma list), depth, seed, shuffle.
struct SynthModelConfig {
  DirichletSpec spec;
  std::size_t depth = 1;
  std::uint64_t seed = 0;

  friend bool operator==(const SynthModelConfig&, const SynthModelConfig&) = default;
};

SynthModelConfig parse_model_config(const std::string& text);
std::string format_model_config(const SynthModelConfig& config);

}  // namespace seqscore
