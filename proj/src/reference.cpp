#include "seqscore/reference.hpp"

#include <cmath>
#include <limits>

namespace seqscore::reference {

namespace {

struct Walker {
  const TokenDistributionSource& source;
  std::size_t depth;
  ExactStats stats;
  std::vector<TokenId> prefix;

  void walk(double prefix_lp) {
    const TokenDistribution node = source.next(prefix);
    for (std::size_t j = 0; j < node.size(); ++j) {
      const double lp = prefix_lp + node.log_probs()[j];
      prefix.push_back(static_cast<TokenId>(j));
      if (prefix.size() == depth) {
        ++stats.leaves;
        if (lp > -std::numeric_limits<double>::infinity()) {
          const double p = std::exp(lp);
          stats.total_mass += p;
          stats.entropy_nats -= p * lp;
        }
        if (lp > stats.max_log_prob) {
          stats.max_log_prob = lp;
          stats.argmax_tokens = prefix;
        }
      } else {
        walk(lp);
      }
      prefix.pop_back();
    }
  }
};

}  // namespace

ExactStats exact_stats(const TokenDistributionSource& source, const EnumerationBudget& budget) {
  check_budget(source.vocab().size(), source.max_len(), budget);
  Walker w{source, source.max_len(), {}, {}};
  w.stats.max_log_prob = -std::numeric_limits<double>::infinity();
  w.walk(0.0);
  return w.stats;
}

}  // namespace seqscore::reference
