#include "seqscore/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seqscore/errors.hpp"
#include "seqscore/rng.hpp"

namespace seqscore {

namespace {

std::size_t resolve_length(const TokenDistributionSource& source, std::size_t length) {
  if (length == 0) return source.max_len();
  if (length > source.max_len()) {
    throw InputError("decode length " + std::to_string(length) + " exceeds max_len " +
                     std::to_string(source.max_len()));
  }
  return length;
}

struct Hypothesis {
  std::vector<TokenId> tokens;
  std::vector<double> log_probs;
  double score = 0.0;
};

struct Candidate {
  std::size_t beam;
  TokenId token;
  double token_log_prob;
  double score;
};

}  // namespace

ScoredSequence greedy(const TokenDistributionSource& source, std::size_t length) {
  const std::size_t len = resolve_length(source, length);
  std::vector<TokenId> tokens;
  std::vector<double> lps;
  tokens.reserve(len);
  lps.reserve(len);
  for (std::size_t t = 0; t < len; ++t) {
    const TokenDistribution d = source.next(tokens);
    const TokenId best = d.argmax();
    tokens.push_back(best);
    lps.push_back(d.log_prob(best));
  }
  return ScoredSequence(std::move(tokens), std::move(lps));
}

std::vector<ScoredSequence> beam_search(const TokenDistributionSource& source, std::size_t width,
                                        std::size_t length) {
  if (width == 0) throw InputError("beam width must be >= 1");
  const std::size_t len = resolve_length(source, length);

  std::vector<Hypothesis> beams(1);
  std::vector<Candidate> candidates;
  for (std::size_t t = 0; t < len; ++t) {
    candidates.clear();
    for (std::size_t b = 0; b < beams.size(); ++b) {
      const TokenDistribution d = source.next(beams[b].tokens);
      const auto lps = d.log_probs();
      for (std::size_t j = 0; j < lps.size(); ++j) {
        candidates.push_back({b, static_cast<TokenId>(j), lps[j], beams[b].score + lps[j]});
      }
    }
    // Beams are kept in (score desc, tokens asc) order, so two candidates with
    // equal score compare lexicographically by (parent beam tokens, token).
    const auto better = [&](const Candidate& a, const Candidate& c) {
      if (a.score != c.score) return a.score > c.score;
      if (a.beam != c.beam) return beams[a.beam].tokens < beams[c.beam].tokens;
      return a.token < c.token;
    };
    const std::size_t keep = std::min(width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), better);

    std::vector<Hypothesis> next(keep);
    for (std::size_t k = 0; k < keep; ++k) {
      const Candidate& c = candidates[k];
      const Hypothesis& parent = beams[c.beam];
      next[k].tokens = parent.tokens;
      next[k].tokens.push_back(c.token);
      next[k].log_probs = parent.log_probs;
      next[k].log_probs.push_back(c.token_log_prob);
      next[k].score = c.score;
    }
    beams = std::move(next);
  }

  std::vector<ScoredSequence> out;
  out.reserve(beams.size());
  for (auto& h : beams) out.emplace_back(std::move(h.tokens), std::move(h.log_probs));
  return out;
}

std::vector<ScoredSequence> multinomial_sample(const TokenDistributionSource& source, double temperature,
                                               std::uint64_t seed, std::size_t n_samples,
                                               std::size_t length) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InputError("temperature must be > 0");
  }
  if (n_samples == 0) throw InputError("n_samples must be >= 1");
  const std::size_t len = resolve_length(source, length);
  const double inv_temp = 1.0 / temperature;

  SplitMix64 rng(seed);
  std::vector<ScoredSequence> out;
  out.reserve(n_samples);
  std::vector<double> weights;
  for (std::size_t n = 0; n < n_samples; ++n) {
    std::vector<TokenId> tokens;
    std::vector<double> lps;
    tokens.reserve(len);
    lps.reserve(len);
    for (std::size_t t = 0; t < len; ++t) {
      const TokenDistribution d = source.next(tokens);
      const auto lp = d.log_probs();
      const double hi = *std::max_element(lp.begin(), lp.end());
      weights.resize(lp.size());
      double total = 0.0;
      for (std::size_t j = 0; j < lp.size(); ++j) {
        weights[j] = std::exp((lp[j] - hi) * inv_temp);
        total += weights[j];
      }
      const double u = rng.uniform() * total;
      double cum = 0.0;
      std::size_t pick = lp.size();
      std::size_t last_positive = 0;
      for (std::size_t j = 0; j < lp.size(); ++j) {
        if (weights[j] <= 0.0) continue;
        last_positive = j;
        cum += weights[j];
        if (u < cum) {
          pick = j;
          break;
        }
      }
      if (pick == lp.size()) pick = last_positive;
      tokens.push_back(static_cast<TokenId>(pick));
      lps.push_back(lp[pick]);
    }
    out.emplace_back(std::move(tokens), std::move(lps));
  }
  return out;
}

std::vector<ScoredSequence> decode(const TokenDistributionSource& source, const DecodeConfig& config,
                                   std::size_t n_samples) {
  if (const auto* beam = std::get_if<BeamDecode>(&config.strategy)) {
    return beam_search(source, beam->width, config.length);
  }
  if (const auto* ms = std::get_if<MultinomialDecode>(&config.strategy)) {
    return multinomial_sample(source, ms->temperature, ms->seed, n_samples, config.length);
  }
  return {greedy(source, config.length)};
}

DecodeConfig make_decode_config(const std::string& strategy, std::size_t beam_width, double temperature,
                                std::uint64_t seed, std::size_t length) {
  DecodeConfig cfg;
  cfg.length = length;
  if (strategy == "greedy") {
    cfg.strategy = GreedyDecode{};
  } else if (strategy == "beam") {
    if (beam_width == 0) throw InputError("beam width must be >= 1");
    cfg.strategy = BeamDecode{beam_width};
  } else if (strategy == "multinomial" || strategy == "ms") {
    if (!(temperature > 0.0)) throw InputError("temperature must be > 0");
    cfg.strategy = MultinomialDecode{temperature, seed};
  } else {
    throw InputError("unknown decode strategy '" + strategy + "'");
  }
  return cfg;
}

}  // namespace seqscore
