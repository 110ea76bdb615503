#include "seqscore/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "seqscore/errors.hpp"

namespace seqscore {

namespace {

const std::vector<std::size_t>& require_clusters(const SampleSet& set) {
  if (set.samples.empty()) throw InputError("sample set is empty");
  if (!set.cluster_ids) throw InputError("sample set has no cluster ids");
  if (set.cluster_ids->size() != set.samples.size()) {
    throw InputError("cluster ids do not cover all samples");
  }
  return *set.cluster_ids;
}

/// Relabels arbitrary cluster ids to 0..K-1 in first-appearance order.
std::vector<std::size_t> dense_labels(const std::vector<std::size_t>& ids, std::size_t& k) {
  std::vector<std::size_t> seen;
  std::vector<std::size_t> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = std::find(seen.begin(), seen.end(), ids[i]);
    out[i] = static_cast<std::size_t>(it - seen.begin());
    if (it == seen.end()) seen.push_back(ids[i]);
  }
  k = seen.size();
  return out;
}

}  // namespace

std::string_view to_string(Measure m) noexcept {
  switch (m) {
    case Measure::GNLL: return "G-NLL";
    case Measure::PE: return "PE";
    case Measure::LNPE: return "LN-PE";
    case Measure::SE: return "SE";
    case Measure::LNSE: return "LN-SE";
    case Measure::DSE: return "D-SE";
  }
  return "?";
}

Measure parse_measure(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c != '-' && c != '_') key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (key == "GNLL") return Measure::GNLL;
  if (key == "PE") return Measure::PE;
  if (key == "LNPE") return Measure::LNPE;
  if (key == "SE") return Measure::SE;
  if (key == "LNSE") return Measure::LNSE;
  if (key == "DSE") return Measure::DSE;
  throw InputError("unknown measure '" + std::string(name) + "'");
}

bool needs_clusters(Measure m) noexcept {
  return m == Measure::SE || m == Measure::LNSE || m == Measure::DSE;
}

bool needs_samples(Measure m) noexcept { return m != Measure::GNLL; }

UncertaintyScore g_nll(const ScoredSequence& reference) {
  if (reference.length() == 0) throw InputError("reference has no token log-probs");
  return {Measure::GNLL, -reference.total_log_prob()};
}

UncertaintyScore predictive_entropy(const SampleSet& set, bool normalized) {
  if (set.samples.empty()) throw InputError("sample set is empty");
  double acc = 0.0;
  for (const auto& s : set.samples) acc -= normalized ? s.ln_log_prob() : s.total_log_prob();
  return {normalized ? Measure::LNPE : Measure::PE, acc / static_cast<double>(set.samples.size())};
}

UncertaintyScore semantic_entropy(const SampleSet& set, bool normalized) {
  std::size_t k = 0;
  const auto labels = dense_labels(require_clusters(set), k);
  const std::size_t n = set.samples.size();

  std::vector<double> loglik(n);
  for (std::size_t i = 0; i < n; ++i) {
    loglik[i] = normalized ? set.samples[i].ln_log_prob() : set.samples[i].total_log_prob();
  }
  const double log_total = log_sum_exp(loglik);
  if (log_total == -std::numeric_limits<double>::infinity()) {
    throw InputError("sample set has zero total likelihood mass");
  }

  std::vector<std::vector<double>> members(k);
  for (std::size_t i = 0; i < n; ++i) members[labels[i]].push_back(loglik[i]);
  std::vector<double> log_cluster(k);
  for (std::size_t c = 0; c < k; ++c) log_cluster[c] = log_sum_exp(members[c]) - log_total;

  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc -= log_cluster[labels[i]];
  // A cluster whose members all have zero likelihood has mass 0; the estimate is then +inf.
  return {normalized ? Measure::LNSE : Measure::SE, acc / static_cast<double>(n)};
}

UncertaintyScore discrete_semantic_entropy(const SampleSet& set) {
  std::size_t k = 0;
  const auto labels = dense_labels(require_clusters(set), k);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t c : labels) ++counts[c];
  const double n = static_cast<double>(labels.size());
  double h = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return {Measure::DSE, h};
}

UncertaintyScore compute_measure(Measure m, const ScoredSequence* reference, const SampleSet* set) {
  if (m == Measure::GNLL) {
    if (!reference) throw InputError("G-NLL needs a reference sequence");
    return g_nll(*reference);
  }
  if (!set) throw InputError(std::string(to_string(m)) + " needs a sample set");
  switch (m) {
    case Measure::PE: return predictive_entropy(*set, false);
    case Measure::LNPE: return predictive_entropy(*set, true);
    case Measure::SE: return semantic_entropy(*set, false);
    case Measure::LNSE: return semantic_entropy(*set, true);
    case Measure::DSE: return discrete_semantic_entropy(*set);
    case Measure::GNLL: break;
  }
  throw InputError("unhandled measure");
}

}  // namespace seqscore
