#include "seqscore/seqmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "seqscore/errors.hpp"

namespace seqscore {

namespace {

void check_log_prob(double lp) {
  if (std::isnan(lp)) throw InputError("log-probability is NaN");
  if (lp > 0.0) throw InputError("log-probability " + std::to_string(lp) + " > 0");
}

}  // namespace

Vocab::Vocab(std::size_t size) : size_(size) {
  if (size < 2) throw InputError("vocabulary size must be >= 2, got " + std::to_string(size));
}

TokenDistribution TokenDistribution::from_log_probs(std::vector<double> log_probs) {
  if (log_probs.size() < 2) throw InputError("token distribution needs at least 2 entries");
  double mass = 0.0;
  for (double lp : log_probs) {
    check_log_prob(lp);
    mass += std::exp(lp);
  }
  if (std::abs(mass - 1.0) > 1e-9) {
    throw InputError("token distribution sums to " + std::to_string(mass) + ", expected 1");
  }
  return TokenDistribution(std::move(log_probs));
}

TokenDistribution TokenDistribution::from_probs(std::span<const double> probs) {
  std::vector<double> lp(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (std::isnan(probs[i]) || probs[i] < 0.0) throw InputError("probability must be >= 0");
    lp[i] = std::log(probs[i]);
  }
  return from_log_probs(std::move(lp));
}

TokenDistribution TokenDistribution::assume_normalized(std::vector<double> log_probs) noexcept {
  return TokenDistribution(std::move(log_probs));
}

TokenId TokenDistribution::argmax() const noexcept {
  const auto it = std::max_element(log_probs_.begin(), log_probs_.end());
  return static_cast<TokenId>(it - log_probs_.begin());
}

ScoredSequence::ScoredSequence(std::vector<TokenId> tokens, std::vector<double> token_log_probs)
    : tokens_(std::move(tokens)), token_log_probs_(std::move(token_log_probs)) {
  if (token_log_probs_.empty()) throw InputError("scored sequence must have at least one token");
  if (!tokens_.empty() && tokens_.size() != token_log_probs_.size()) {
    throw InputError("scored sequence has " + std::to_string(tokens_.size()) + " tokens but " +
                     std::to_string(token_log_probs_.size()) + " log-probs");
  }
  for (double lp : token_log_probs_) {
    check_log_prob(lp);
    total_ += lp;
  }
}

ScoredSequence ScoredSequence::from_log_probs(std::vector<double> token_log_probs) {
  return ScoredSequence({}, std::move(token_log_probs));
}

FunctionSource::FunctionSource(Vocab vocab, std::size_t max_len, Fn fn)
    : vocab_(vocab), max_len_(max_len), fn_(std::move(fn)) {
  if (max_len_ == 0) throw InputError("max_len must be >= 1");
}

TokenDistribution FunctionSource::next(std::span<const TokenId> prefix) const {
  TokenDistribution d = fn_(prefix);
  if (d.size() != vocab_.size()) throw InputError("distribution size does not match vocabulary");
  return d;
}

UniformSource::UniformSource(Vocab vocab, std::size_t max_len) : vocab_(vocab), max_len_(max_len) {
  if (max_len_ == 0) throw InputError("max_len must be >= 1");
}

TokenDistribution UniformSource::next(std::span<const TokenId>) const {
  const double lp = -std::log(static_cast<double>(vocab_.size()));
  return TokenDistribution::assume_normalized(std::vector<double>(vocab_.size(), lp));
}

double sequence_log_prob(const TokenDistributionSource& source, std::span<const TokenId> tokens) {
  return score_sequence(source, tokens).total_log_prob();
}

ScoredSequence score_sequence(const TokenDistributionSource& source, std::span<const TokenId> tokens) {
  if (tokens.size() > source.max_len()) {
    throw InputError("sequence length " + std::to_string(tokens.size()) + " exceeds max_len " +
                     std::to_string(source.max_len()));
  }
  const Vocab vocab = source.vocab();
  std::vector<double> lps;
  lps.reserve(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (!vocab.contains(tokens[t])) {
      throw InputError("token id " + std::to_string(tokens[t]) + " out of range at position " +
                       std::to_string(t));
    }
    lps.push_back(source.next(tokens.first(t)).log_prob(tokens[t]));
  }
  return ScoredSequence(std::vector<TokenId>(tokens.begin(), tokens.end()), std::move(lps));
}

double length_normalized_log_prob(std::span<const double> token_log_probs) {
  if (token_log_probs.empty()) throw InputError("length normalization of an empty sequence");
  double total = 0.0;
  for (double lp : token_log_probs) total += lp;
  return total / static_cast<double>(token_log_probs.size());
}

double length_normalized_log_prob(const ScoredSequence& seq) { return seq.ln_log_prob(); }

double log_sum_exp(std::span<const double> xs) noexcept {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double hi = kNegInf;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

}  // namespace seqscore
