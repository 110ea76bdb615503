#include "seqscore/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "seqscore/errors.hpp"
#include "seqscore/text.hpp"

namespace seqscore {

namespace {

double token_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const auto& t : gold) ++counts[t];
  int common = 0;
  for (const auto& t : pred) {
    if (auto it = counts.find(t); it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double squad_f1(const std::string& prediction, const std::vector<std::string>& gold) {
  if (gold.empty()) throw InputError("squad_f1 needs at least one gold answer");
  const auto pred = normalized_tokens(prediction);
  double best = 0.0;
  for (const auto& g : gold) best = std::max(best, token_f1(pred, normalized_tokens(g)));
  return best;
}

bool is_correct_f1(const std::string& prediction, const std::vector<std::string>& gold,
                   const F1Config& config) {
  return squad_f1(prediction, gold) > config.threshold;
}

double auroc(std::span<const LabeledScore> items) {
  std::size_t n_incorrect = 0;
  for (const auto& it : items) {
    if (!std::isfinite(it.score)) throw EvaluationError("AUROC input contains a non-finite score");
    if (!it.correct) ++n_incorrect;
  }
  const std::size_t n_correct = items.size() - n_incorrect;
  if (n_incorrect == 0 || n_correct == 0) {
    throw EvaluationError("AUROC needs both correct and incorrect items");
  }

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return items[a].score < items[b].score; });

  // Sum of mid-ranks (1-based) of the incorrect items.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && items[order[j]].score == items[order[i]].score) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (!items[order[k]].correct) rank_sum += mid_rank;
    }
    i = j;
  }
  const double n1 = static_cast<double>(n_incorrect);
  const double u = rank_sum - n1 * (n1 + 1.0) / 2.0;
  return u / (n1 * static_cast<double>(n_correct));
}

double rejection_accuracy(std::span<const LabeledScore> items, double keep_fraction) {
  if (items.empty()) throw EvaluationError("rejection accuracy of an empty set");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw InputError("keep fraction must be in (0, 1]");
  }
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return items[a].score < items[b].score; });
  // The epsilon keeps e.g. 0.29 * 100 from flooring to 28.
  const auto kept = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(keep_fraction * static_cast<double>(items.size()) + 1e-9)));
  std::size_t correct = 0;
  for (std::size_t k = 0; k < kept; ++k) correct += items[order[k]].correct ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(kept);
}

}  // namespace seqscore
