#pragma once

// Test-only models and oracles. Nothing here calls into the enumeration or
// decoding code under test.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "seqscore/seqmodel.hpp"

namespace seqscore::testing {

/// |V| = 2, T = 2: p(0) = 0.6, p(0|0) = 0.7, p(0|1) = 0.5.
/// Sequence probabilities: 00 -> 0.42, 01 -> 0.18, 10 -> 0.20, 11 -> 0.20.
inline FunctionSource toy_model() {
  return FunctionSource(Vocab(2), 2, [](std::span<const TokenId> prefix) {
    if (prefix.empty()) return TokenDistribution::from_probs(std::vector<double>{0.6, 0.4});
    if (prefix[0] == 0) return TokenDistribution::from_probs(std::vector<double>{0.7, 0.3});
    return TokenDistribution::from_probs(std::vector<double>{0.5, 0.5});
  });
}

/// Deterministic model following `path`; off-path prefixes put all mass on token 0.
inline FunctionSource one_hot_model(std::size_t vocab, std::vector<TokenId> path) {
  const std::size_t len = path.size();
  return FunctionSource(Vocab(vocab), len, [vocab, path](std::span<const TokenId> prefix) {
    std::vector<double> p(vocab, 0.0);
    bool on_path = true;
    for (std::size_t t = 0; t < prefix.size(); ++t) on_path = on_path && prefix[t] == path[t];
    p[on_path ? path[prefix.size()] : 0] = 1.0;
    return TokenDistribution::from_probs(p);
  });
}

struct BruteForce {
  double entropy = 0.0;
  double mass = 0.0;
  double max_log_prob = -std::numeric_limits<double>::infinity();
  std::vector<TokenId> argmax;
  std::vector<std::pair<std::vector<TokenId>, double>> sequences;  // (tokens, log p)
};

/// Odometer over every full-length sequence, each scored independently with
/// sequence_log_prob. Exponential in depth; for small models only.
inline BruteForce brute_force(const TokenDistributionSource& source) {
  BruteForce out;
  const std::size_t v = source.vocab().size();
  const std::size_t t = source.max_len();
  std::vector<TokenId> seq(t, 0);
  for (;;) {
    const double lp = sequence_log_prob(source, seq);
    out.sequences.emplace_back(seq, lp);
    if (lp > -std::numeric_limits<double>::infinity()) {
      out.mass += std::exp(lp);
      out.entropy -= std::exp(lp) * lp;
    }
    if (lp > out.max_log_prob) {
      out.max_log_prob = lp;
      out.argmax = seq;
    }
    std::size_t pos = t;
    while (pos > 0) {
      --pos;
      if (++seq[pos] < v) break;
      seq[pos] = 0;
      if (pos == 0) return out;
    }
    if (t == 0) return out;
  }
}

}  // namespace seqscore::testing
