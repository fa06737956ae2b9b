#include "ergm/enumerate.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "ergm/numeric.hpp"

namespace ergm {

Graph graph_from_pair_mask(int n, std::uint64_t mask) {
    Graph g(n);
    int bit = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j, ++bit) {
            if ((mask >> bit) & 1u) g.toggle(i, j);
        }
    }
    return g;
}

ExactModel build_exact_model(int n, const StatsConfig& cfg) {
    if (n < 1 || n > 5) {
        throw std::invalid_argument("build_exact_model: enumeration is capped at n <= 5");
    }
    cfg.validate();
    ExactModel model;
    model.n = n;
    model.cfg = cfg;

    std::map<StatsVector, std::int64_t> counts;
    const std::uint64_t total = std::uint64_t{1} << (n * (n - 1) / 2);
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        counts[summary_stats(graph_from_pair_mask(n, mask), cfg)] += 1;
    }
    model.table.assign(counts.begin(), counts.end());
    return model;
}

namespace {

std::vector<double> table_log_weights(const ThetaVector& theta, const ExactModel& model) {
    if (static_cast<int>(theta.size()) != model.cfg.dim()) {
        throw std::invalid_argument("exact model: theta dimension does not match cfg");
    }
    std::vector<double> lw(model.table.size());
    for (std::size_t k = 0; k < model.table.size(); ++k) {
        lw[k] = std::log(static_cast<double>(model.table[k].second)) +
                dot(theta, model.table[k].first);
    }
    return lw;
}

}  // namespace

double exact_log_normalizer(const ThetaVector& theta, const ExactModel& model) {
    const std::vector<double> lw = table_log_weights(theta, model);
    return logsumexp(lw);
}

double exact_normalizer(const ThetaVector& theta, const ExactModel& model) {
    return std::exp(exact_log_normalizer(theta, model));
}

std::vector<std::pair<StatsVector, double>> exact_stat_distribution(const ThetaVector& theta,
                                                                    const ExactModel& model) {
    const std::vector<double> lw = table_log_weights(theta, model);
    const double log_c = logsumexp(lw);
    std::vector<std::pair<StatsVector, double>> dist(model.table.size());
    for (std::size_t k = 0; k < model.table.size(); ++k) {
        dist[k] = {model.table[k].first, std::exp(lw[k] - log_c)};
    }
    return dist;
}

}  // namespace ergm
