#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ergm/graph.hpp"

namespace ergm {

// Exhaustive enumeration over all 2^(n(n-1)/2) labelled graphs, n <= 5.
// The table stores deduplicated statistic vectors with multiplicities.
struct ExactModel {
    int n = 0;
    StatsConfig cfg;
    std::vector<std::pair<StatsVector, std::int64_t>> table;

    std::int64_t graph_count() const { return std::int64_t{1} << (n * (n - 1) / 2); }
};

// Pairs are ordered (0,1),(0,2),...,(0,n-1),(1,2),...; bit b of mask selects
// the b-th pair in that order.
Graph graph_from_pair_mask(int n, std::uint64_t mask);

ExactModel build_exact_model(int n, const StatsConfig& cfg);

// log c(theta) = log sum_y exp(theta . h(y)), via log-sum-exp over the table.
double exact_log_normalizer(const ThetaVector& theta, const ExactModel& model);
double exact_normalizer(const ThetaVector& theta, const ExactModel& model);

// P(h(Y) = h_k | theta) for each distinct statistics vector in the table.
std::vector<std::pair<StatsVector, double>> exact_stat_distribution(const ThetaVector& theta,
                                                                    const ExactModel& model);

}  // namespace ergm
