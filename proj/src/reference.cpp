#include "ergm/reference.hpp"

#include <algorithm>
#include <cmath>

namespace ergm {

SharedPartnerProfile reference_shared_partner_profile(const Graph& g) {
    const int n = g.vertex_count();
    SharedPartnerProfile profile;
    profile.connected.assign(std::max(n - 2, 0), 0);
    profile.nonconnected.assign(std::max(n - 2, 0), 0);
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            int shared = 0;
            for (int w = 0; w < n; ++w) {
                if (w == u || w == v) continue;
                if (g.has_edge(u, w) && g.has_edge(v, w)) ++shared;
            }
            if (shared < 1) continue;
            if (g.has_edge(u, v)) {
                profile.connected[shared - 1] += 1;
            } else {
                profile.nonconnected[shared - 1] += 1;
            }
        }
    }
    return profile;
}

namespace {

double reference_gw(std::span<const std::int64_t> counts, double decay) {
    const double base = 1.0 - std::exp(-decay);
    double acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double weight = 1.0 - std::pow(base, static_cast<double>(i + 1));
        acc += weight * static_cast<double>(counts[i]);
    }
    return std::exp(decay) * acc;
}

}  // namespace

StatsVector reference_summary_stats(const Graph& g, const StatsConfig& cfg) {
    const int n = g.vertex_count();
    std::int64_t edges = 0;
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            if (g.has_edge(u, v)) ++edges;
        }
    }
    const SharedPartnerProfile profile = reference_shared_partner_profile(g);
    StatsVector out(cfg.stat_set.size(), 0.0);
    for (std::size_t k = 0; k < cfg.stat_set.size(); ++k) {
        switch (cfg.stat_set[k]) {
            case Stat::edges: out[k] = static_cast<double>(edges); break;
            case Stat::gwesp: out[k] = reference_gw(profile.connected, cfg.decay); break;
            case Stat::gwnsp: out[k] = reference_gw(profile.nonconnected, cfg.decay); break;
        }
    }
    return out;
}

StatsVector reference_change_stats(const Graph& g, int i, int j, const StatsConfig& cfg) {
    const StatsVector before = reference_summary_stats(g, cfg);
    const StatsVector after = reference_summary_stats(toggle_edge(g, i, j), cfg);
    StatsVector delta(before.size());
    for (std::size_t k = 0; k < before.size(); ++k) delta[k] = after[k] - before[k];
    return delta;
}

}  // namespace ergm
