#pragma once

// Uncertainty measures over one generation: the zero-one-score measure G-NLL,
// which needs only the reference (greedy or best-of-beam) output, and the
// logarithmic-score baselines, which average over sampled outputs.
// Higher values mean more uncertain. All values are in nats.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqscore/seqmodel.hpp"

namespace seqscore {

enum class Measure { GNLL, PE, LNPE, SE, LNSE, DSE };

inline constexpr Measure kAllMeasures[] = {Measure::GNLL, Measure::PE,   Measure::LNPE,
                                           Measure::SE,   Measure::LNSE, Measure::DSE};

/// Canonical names: G-NLL, PE, LN-PE, SE, LN-SE, D-SE.
std::string_view to_string(Measure m) noexcept;
/// Accepts canonical names and the dash-free enum spellings (GNLL, LNPE, ...), case-insensitive.
Measure parse_measure(std::string_view name);
/// Measures that need cluster ids.
bool needs_clusters(Measure m) noexcept;
/// Measures that need sampled outputs.
bool needs_samples(Measure m) noexcept;

struct UncertaintyScore {
  Measure measure;
  double value;
};

struct SampleSet {
  std::vector<ScoredSequence> samples;
  /// Semantic cluster label per sample, when clustering was run.
  std::optional<std::vector<std::size_t>> cluster_ids;
};

/// -log p(reference) = -Σ_t token_log_probs[t].
UncertaintyScore g_nll(const ScoredSequence& reference);

/// Monte Carlo predictive entropy (1/N) Σ_n -log p(y_n).
/// With `normalized`, uses the length-normalized log-likelihood instead (LN-PE).
UncertaintyScore predictive_entropy(const SampleSet& set, bool normalized);

/// Semantic entropy (1/N) Σ_n -log p̂(c_n), where p̂(c) is the likelihood mass of
/// cluster c normalized over the sampled set. With `normalized`, sequence
/// likelihoods are length-normalized (LN-SE).
UncertaintyScore semantic_entropy(const SampleSet& set, bool normalized);

/// Entropy of the empirical cluster frequencies; ignores likelihoods.
UncertaintyScore discrete_semantic_entropy(const SampleSet& set);

/// Dispatches any measure. `reference` is required for G-NLL, `set` for the rest.
UncertaintyScore compute_measure(Measure m, const ScoredSequence* reference, const SampleSet* set);

}  // namespace seqscore
