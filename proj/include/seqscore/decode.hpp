#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "seqscore/seqmodel.hpp"

namespace seqscore {

struct GreedyDecode {};

struct BeamDecode {
  std::size_t width = 1;
};

struct MultinomialDecode {
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

using DecodeStrategy = std::variant<GreedyDecode, BeamDecode, MultinomialDecode>;

struct DecodeConfig {
  DecodeStrategy strategy = GreedyDecode{};
  /// Sequence length; 0 means the source's max_len.
  std::size_t length = 0;
};

/// Per-step argmax; ties go to the lowest token id.
ScoredSequence greedy(const TokenDistributionSource& source, std::size_t length = 0);

/// Fixed-length beam search without length penalty.
///
/// Every level expands all kept prefixes and keeps the top `width` by total
/// log-prob, ties broken by lexicographically smaller tokens. Returns the final
/// beam sorted best first; `width == 1` is greedy decoding.
std::vector<ScoredSequence> beam_search(const TokenDistributionSource& source, std::size_t width,
                                        std::size_t length = 0);

/// Ancestral sampling from the tempered next-token distributions p_i^(1/T).
/// Recorded log-probs are always those of the untempered source.
/// Deterministic given `seed`. Throws InputError for temperature <= 0 or n_samples == 0.
std::vector<ScoredSequence> multinomial_sample(const TokenDistributionSource& source, double temperature,
                                               std::uint64_t seed, std::size_t n_samples,
                                               std::size_t length = 0);

/// Runs `config`: greedy yields one sequence, beam the final beam, multinomial `n_samples` draws.
std::vector<ScoredSequence> decode(const TokenDistributionSource& source, const DecodeConfig& config,
                                   std::size_t n_samples = 1);

/// Parses --strategy style names: "greedy", "beam", "multinomial" (alias "ms").
DecodeConfig make_decode_config(const std::string& strategy, std::size_t beam_width, double temperature,
                                std::uint64_t seed, std::size_t length);

}  // namespace seqscore
