#pragma once

#include <span>
#include <string>
#include <vector>

namespace seqscore {

struct LabeledScore {
  double score;  // uncertainty; higher = more uncertain
  bool correct;
};

struct F1Config {
  double threshold = 0.5;
};

/// SQuAD token F1 of `prediction` against the best-matching gold answer.
/// Both sides empty after normalization -> 1; exactly one empty -> 0.
double squad_f1(const std::string& prediction, const std::vector<std::string>& gold);

/// True when squad_f1 exceeds the threshold (strictly).
bool is_correct_f1(const std::string& prediction, const std::vector<std::string>& gold,
                   const F1Config& config = {});

/// Probability that a random incorrect item scores strictly higher than a
/// random correct item, ties counted as one half (Mann-Whitney U / (n0 n1)).
/// Computed from mid-ranks in O(n log n). Throws EvaluationError unless both
/// classes are present or when a score is not finite.
double auroc(std::span<const LabeledScore> items);

/// Accuracy over the floor(keep_fraction * N) least uncertain items (at least
/// one). Ties keep input order. Throws EvaluationError on empty input and
/// InputError unless 0 < keep_fraction <= 1.
double rejection_accuracy(std::span<const LabeledScore> items, double keep_fraction);

}  // namespace seqscore
