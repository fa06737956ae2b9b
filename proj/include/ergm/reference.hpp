#pragma once

#include "ergm/graph.hpp"

namespace ergm {

// Serial reference implementations of the summary statistics, kept alongside
// the bitset fast path for testing, the CLI self-test, and the benchmark.
// They use only adjacency queries and evaluate the GW weights with pow()
// directly, so they share no code path with the implementations they check.

// O(n^3) triple loop over vertex pairs and candidate shared partners.
SharedPartnerProfile reference_shared_partner_profile(const Graph& g);

StatsVector reference_summary_stats(const Graph& g, const StatsConfig& cfg);

// Full-recomputation difference h(g ^ (i,j)) - h(g).
StatsVector reference_change_stats(const Graph& g, int i, int j, const StatsConfig& cfg);

}  // namespace ergm
