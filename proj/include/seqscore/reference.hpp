#pragma once

// Serial reference kernels. Kept for testing the OpenMP paths and as the
// baseline of the benchmark; not used by the CLI.

#include "seqscore/synthdist.hpp"

namespace seqscore::reference {

/// Single-threaded depth-first enumeration with plain running sums.
ExactStats exact_stats(const TokenDistributionSource& source, const EnumerationBudget& budget = {});

}  // namespace seqscore::reference
