#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergm {

enum class Stat { edges, gwesp, gwnsp };

const char* stat_name(Stat s);
Stat stat_from_name(const std::string& name);

// Which statistics are enabled and in what coordinate order. The order fixes
// the layout of every statistics vector and theta vector in the system.
struct StatsConfig {
    double decay = 0.75;
    std::vector<Stat> stat_set = {Stat::edges, Stat::gwesp, Stat::gwnsp};

    int dim() const { return static_cast<int>(stat_set.size()); }
    bool has(Stat s) const;
    bool uses_gw() const { return has(Stat::gwesp) || has(Stat::gwnsp); }
    void validate() const;  // nonempty, duplicate-free, decay >= 0
};

using ThetaVector = std::vector<double>;
using StatsVector = std::vector<double>;

// Undirected simple graph over vertices [0, n). Adjacency is a dense
// symmetric bitset: row i holds the neighbour mask of vertex i, so a
// common-neighbour count is a popcount over ANDed rows.
class Graph {
  public:
    Graph() = default;
    explicit Graph(int n);

    int vertex_count() const { return n_; }
    std::int64_t edge_count() const { return edges_; }
    std::int64_t pair_count() const {
        return static_cast<std::int64_t>(n_) * (n_ - 1) / 2;
    }

    bool has_edge(int i, int j) const {
        check_pair(i, j);
        return bit(i, j);
    }

    // Flips the edge state of the unordered pair (i, j) in place.
    void toggle(int i, int j);

    int degree(int i) const;
    int common_neighbors(int i, int j) const;

    // Invokes fn(i, j) with i < j for every present edge, in row order.
    template <typename Fn>
    void for_each_edge(Fn&& fn) const {
        for (int i = 0; i < n_; ++i) {
            for_each_neighbor(i, [&](int j) {
                if (j > i) fn(i, j);
            });
        }
    }

    // Invokes fn(j) for every neighbour j of i, in increasing order.
    template <typename Fn>
    void for_each_neighbor(int i, Fn&& fn) const {
        const std::uint64_t* row = row_ptr(i);
        for (int w = 0; w < words_; ++w) {
            std::uint64_t bits = row[w];
            while (bits) {
                const int b = std::countr_zero(bits);
                fn(w * 64 + b);
                bits &= bits - 1;
            }
        }
    }

    bool operator==(const Graph& other) const {
        return n_ == other.n_ && adj_ == other.adj_;
    }

    static Graph complete(int n);

    // Returns a copy with vertex i of the original relabelled to perm[i].
    Graph relabelled(std::span<const int> perm) const;

  private:
    void check_pair(int i, int j) const {
        if (i == j || i < 0 || j < 0 || i >= n_ || j >= n_) {
            throw std::invalid_argument("Graph: invalid vertex pair");
        }
    }
    const std::uint64_t* row_ptr(int i) const { return adj_.data() + static_cast<std::size_t>(i) * words_; }
    std::uint64_t* row_ptr(int i) { return adj_.data() + static_cast<std::size_t>(i) * words_; }
    bool bit(int i, int j) const {
        return (row_ptr(i)[j >> 6] >> (j & 63)) & 1u;
    }

    int n_ = 0;
    int words_ = 0;
    std::int64_t edges_ = 0;
    std::vector<std::uint64_t> adj_;
};

// Shared-partner counts over unordered vertex pairs. Entry [i-1] is the
// number of pairs with exactly i common neighbours, i in [1, n-2]; pairs
// with zero common neighbours are not stored (their GW weight is zero).
struct SharedPartnerProfile {
    std::vector<std::int64_t> connected;
    std::vector<std::int64_t> nonconnected;
};

// Pure toggle: returns a copy of g with the pair (i, j) flipped.
Graph toggle_edge(const Graph& g, int i, int j);

SharedPartnerProfile shared_partner_profile(const Graph& g);

// exp(decay) * sum_i (1 - (1 - exp(-decay))^i) * counts[i-1].
// The power is accumulated by iterative multiplication.
double gw_statistic(std::span<const std::int64_t> counts, double decay);

StatsVector summary_stats(const Graph& g, const StatsConfig& cfg);

// Reusable scratch for the change-statistic hot path.
struct ChangeStatsScratch {
    std::vector<double> weights;
};

// Delta h(g ^ (i,j)) - h(g), computed incrementally: only pairs whose
// shared-partner count can change (those involving i or j) are revisited.
void change_stats(const Graph& g, int i, int j, const StatsConfig& cfg,
                  std::span<double> out, ChangeStatsScratch& scratch);
StatsVector change_stats(const Graph& g, int i, int j, const StatsConfig& cfg);

}  // namespace ergm
