#include "ergm/graph.hpp"

#include <algorithm>
#include <cmath>

namespace ergm {

const char* stat_name(Stat s) {
    switch (s) {
        case Stat::edges: return "edges";
        case Stat::gwesp: return "gwesp";
        case Stat::gwnsp: return "gwnsp";
    }
    throw std::invalid_argument("stat_name: unknown statistic");
}

Stat stat_from_name(const std::string& name) {
    if (name == "edges") return Stat::edges;
    if (name == "gwesp") return Stat::gwesp;
    if (name == "gwnsp") return Stat::gwnsp;
    throw std::invalid_argument("unknown statistic name: " + name);
}

bool StatsConfig::has(Stat s) const {
    return std::find(stat_set.begin(), stat_set.end(), s) != stat_set.end();
}

void StatsConfig::validate() const {
    if (stat_set.empty()) {
        throw std::invalid_argument("StatsConfig: stat_set is empty");
    }
    for (std::size_t i = 0; i < stat_set.size(); ++i) {
        for (std::size_t j = i + 1; j < stat_set.size(); ++j) {
            if (stat_set[i] == stat_set[j]) {
                throw std::invalid_argument("StatsConfig: duplicate statistic");
            }
        }
    }
    if (decay < 0.0 || !std::isfinite(decay)) {
        throw std::invalid_argument("StatsConfig: decay must be a nonnegative real");
    }
}

Graph::Graph(int n) : n_(n) {
    if (n <= 0) {
        throw std::invalid_argument("Graph: vertex count must be positive");
    }
    words_ = (n + 63) / 64;
    adj_.assign(static_cast<std::size_t>(n_) * words_, 0);
}

void Graph::toggle(int i, int j) {
    check_pair(i, j);
    row_ptr(i)[j >> 6] ^= std::uint64_t{1} << (j & 63);
    row_ptr(j)[i >> 6] ^= std::uint64_t{1} << (i & 63);
    edges_ += bit(i, j) ? 1 : -1;
}

int Graph::degree(int i) const {
    if (i < 0 || i >= n_) {
        throw std::invalid_argument("Graph: vertex out of range");
    }
    int acc = 0;
    const std::uint64_t* row = row_ptr(i);
    for (int w = 0; w < words_; ++w) acc += std::popcount(row[w]);
    return acc;
}

int Graph::common_neighbors(int i, int j) const {
    check_pair(i, j);
    const std::uint64_t* a = row_ptr(i);
    const std::uint64_t* b = row_ptr(j);
    int acc = 0;
    for (int w = 0; w < words_; ++w) acc += std::popcount(a[w] & b[w]);
    return acc;
}

Graph Graph::complete(int n) {
    Graph g(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) g.toggle(i, j);
    }
    return g;
}

Graph Graph::relabelled(std::span<const int> perm) const {
    if (static_cast<int>(perm.size()) != n_) {
        throw std::invalid_argument("relabelled: permutation size mismatch");
    }
    Graph out(n_);
    for_each_edge([&](int i, int j) { out.toggle(perm[i], perm[j]); });
    return out;
}

Graph toggle_edge(const Graph& g, int i, int j) {
    Graph out = g;
    out.toggle(i, j);
    return out;
}

SharedPartnerProfile shared_partner_profile(const Graph& g) {
    const int n = g.vertex_count();
    const int slots = std::max(n - 2, 0);
    SharedPartnerProfile profile;
    profile.connected.assign(slots, 0);
    profile.nonconnected.assign(slots, 0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const int c = g.common_neighbors(i, j);
            if (c < 1) continue;
            if (g.has_edge(i, j)) {
                profile.connected[c - 1] += 1;
            } else {
                profile.nonconnected[c - 1] += 1;
            }
        }
    }
    return profile;
}

double gw_statistic(std::span<const std::int64_t> counts, double decay) {
    if (decay < 0.0 || !std::isfinite(decay)) {
        throw std::invalid_argument("gw_statistic: decay must be a nonnegative real");
    }
    const double base = 1.0 - std::exp(-decay);
    double power = 1.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        power *= base;
        acc += (1.0 - power) * static_cast<double>(counts[i]);
    }
    return std::exp(decay) * acc;
}

StatsVector summary_stats(const Graph& g, const StatsConfig& cfg) {
    StatsVector out(cfg.stat_set.size(), 0.0);
    SharedPartnerProfile profile;
    if (cfg.uses_gw()) profile = shared_partner_profile(g);
    for (std::size_t k = 0; k < cfg.stat_set.size(); ++k) {
        switch (cfg.stat_set[k]) {
            case Stat::edges:
                out[k] = static_cast<double>(g.edge_count());
                break;
            case Stat::gwesp:
                out[k] = gw_statistic(profile.connected, cfg.decay);
                break;
            case Stat::gwnsp:
                out[k] = gw_statistic(profile.nonconnected, cfg.decay);
                break;
        }
    }
    return out;
}

namespace {

// Fills weights[c] = exp(tau) * (1 - (1 - exp(-tau))^c) for c in [0, n-2].
void fill_gw_weights(std::vector<double>& weights, int n, double decay) {
    const int slots = std::max(n - 1, 1);
    weights.resize(slots);
    const double scale = std::exp(decay);
    const double base = 1.0 - std::exp(-decay);
    double power = 1.0;
    weights[0] = 0.0;
    for (int c = 1; c < slots; ++c) {
        power *= base;
        weights[c] = scale * (1.0 - power);
    }
}

}  // namespace

void change_stats(const Graph& g, int i, int j, const StatsConfig& cfg,
                  std::span<double> out, ChangeStatsScratch& scratch) {
    if (out.size() != cfg.stat_set.size()) {
        throw std::invalid_argument("change_stats: output dimension mismatch");
    }
    const bool adding = !g.has_edge(i, j);
    const double d_edges = adding ? 1.0 : -1.0;
    double d_esp = 0.0;
    double d_nsp = 0.0;

    if (cfg.uses_gw()) {
        fill_gw_weights(scratch.weights, g.vertex_count(), cfg.decay);
        const std::vector<double>& wt = scratch.weights;

        // The pair (i, j) itself keeps its common-neighbour count but swaps
        // between the connected and nonconnected buckets.
        const int c_ij = g.common_neighbors(i, j);
        if (adding) {
            d_esp += wt[c_ij];
            d_nsp -= wt[c_ij];
        } else {
            d_esp -= wt[c_ij];
            d_nsp += wt[c_ij];
        }

        // Pairs (i, w) for w adjacent to j gain or lose j as a common
        // neighbour; symmetrically for (j, w) with w adjacent to i.
        const int delta = adding ? 1 : -1;
        g.for_each_neighbor(j, [&](int w) {
            if (w == i) return;
            const int c_old = g.common_neighbors(i, w);
            const int c_new = c_old + delta;
            const double dw = wt[c_new] - wt[c_old];
            if (g.has_edge(i, w)) d_esp += dw; else d_nsp += dw;
        });
        g.for_each_neighbor(i, [&](int w) {
            if (w == j) return;
            const int c_old = g.common_neighbors(j, w);
            const int c_new = c_old + delta;
            const double dw = wt[c_new] - wt[c_old];
            if (g.has_edge(j, w)) d_esp += dw; else d_nsp += dw;
        });
    }

    for (std::size_t k = 0; k < cfg.stat_set.size(); ++k) {
        switch (cfg.stat_set[k]) {
            case Stat::edges: out[k] = d_edges; break;
            case Stat::gwesp: out[k] = d_esp; break;
            case Stat::gwnsp: out[k] = d_nsp; break;
        }
    }
}

StatsVector change_stats(const Graph& g, int i, int j, const StatsConfig& cfg) {
    StatsVector out(cfg.stat_set.size(), 0.0);
    ChangeStatsScratch scratch;
    change_stats(g, i, j, cfg, out, scratch);
    return out;
}

}  // namespace ergm
