#pragma once

// Sequence and probability types shared by the synthetic models, the decoders
// and the uncertainty estimators. All log-probabilities are natural logs.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace seqscore {

using TokenId = std::uint32_t;

class Vocab {
 public:
  /// Throws InputError when size < 2.
  explicit Vocab(std::size_t size);

  std::size_t size() const noexcept { return size_; }
  bool contains(TokenId id) const noexcept { return id < size_; }

  friend bool operator==(const Vocab&, const Vocab&) = default;

 private:
  std::size_t size_;
};

/// Next-token distribution stored as log-probabilities. Zero probability is -inf.
class TokenDistribution {
 public:
  /// Validates: no NaN, no positive entry, exp-sum within 1e-9 of one.
  static TokenDistribution from_log_probs(std::vector<double> log_probs);
  static TokenDistribution from_probs(std::span<const double> probs);

  /// Skips the normalization check; callers guarantee the entries came from a
  /// log-sum-exp normalization.
  static TokenDistribution assume_normalized(std::vector<double> log_probs) noexcept;

  std::size_t size() const noexcept { return log_probs_.size(); }
  double log_prob(TokenId id) const { return log_probs_.at(id); }
  std::span<const double> log_probs() const noexcept { return log_probs_; }

  /// Smallest id among the most probable tokens.
  TokenId argmax() const noexcept;

 private:
  explicit TokenDistribution(std::vector<double> lp) noexcept : log_probs_(std::move(lp)) {}
  std::vector<double> log_probs_;
};

/// A token sequence with the per-token log-probabilities it was generated with.
///
/// `tokens` may be empty for sequences ingested from text-only traces; when it
/// is present it must align with `token_log_probs`.
class ScoredSequence {
 public:
  ScoredSequence(std::vector<TokenId> tokens, std::vector<double> token_log_probs);

  /// Text-only sequence (no token ids).
  static ScoredSequence from_log_probs(std::vector<double> token_log_probs);

  const std::vector<TokenId>& tokens() const noexcept { return tokens_; }
  const std::vector<double>& token_log_probs() const noexcept { return token_log_probs_; }
  std::size_t length() const noexcept { return token_log_probs_.size(); }

  /// Sum of token log-probs, i.e. log p(y).
  double total_log_prob() const noexcept { return total_; }
  /// total_log_prob / length, i.e. log of the geometric-mean token probability.
  double ln_log_prob() const noexcept { return total_ / static_cast<double>(length()); }

 private:
  std::vector<TokenId> tokens_;
  std::vector<double> token_log_probs_;
  double total_ = 0.0;
};

/// Provider of next-token distributions for prefixes of a fixed-length sequence.
/// `next` must be pure: the same prefix always yields the same distribution,
/// and concurrent calls are allowed.
class TokenDistributionSource {
 public:
  virtual ~TokenDistributionSource() = default;

  virtual Vocab vocab() const = 0;
  virtual std::size_t max_len() const = 0;
  virtual TokenDistribution next(std::span<const TokenId> prefix) const = 0;
};

/// Adapts a callable into a source. Handy for hand-built toy models.
class FunctionSource final : public TokenDistributionSource {
 public:
  using Fn = std::function<TokenDistribution(std::span<const TokenId>)>;

  FunctionSource(Vocab vocab, std::size_t max_len, Fn fn);

  Vocab vocab() const override { return vocab_; }
  std::size_t max_len() const override { return max_len_; }
  TokenDistribution next(std::span<const TokenId> prefix) const override;

 private:
  Vocab vocab_;
  std::size_t max_len_;
  Fn fn_;
};

/// Uniform distribution over the vocabulary at every step.
class UniformSource final : public TokenDistributionSource {
 public:
  UniformSource(Vocab vocab, std::size_t max_len);

  Vocab vocab() const override { return vocab_; }
  std::size_t max_len() const override { return max_len_; }
  TokenDistribution next(std::span<const TokenId> prefix) const override;

 private:
  Vocab vocab_;
  std::size_t max_len_;
};

/// Σ_t log p(y_t | y_<t). Returns -inf if any step has zero probability.
/// Throws InputError on out-of-range ids or sequences longer than max_len.
double sequence_log_prob(const TokenDistributionSource& source, std::span<const TokenId> tokens);

/// Scores `tokens` under `source`, recording every per-token log-prob.
ScoredSequence score_sequence(const TokenDistributionSource& source, std::span<const TokenId> tokens);

/// (1/T) Σ_t token_log_probs[t]. Throws InputError on an empty sequence.
double length_normalized_log_prob(std::span<const double> token_log_probs);
double length_normalized_log_prob(const ScoredSequence& seq);

/// log Σ exp(x_i), stable; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> xs) noexcept;

}  // namespace seqscore
