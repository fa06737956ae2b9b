#include "ergm/sim.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "ergm/numeric.hpp"

namespace ergm {

namespace {
std::atomic<std::uint64_t> g_networks_simulated{0};
}

std::uint64_t networks_simulated() { return g_networks_simulated.load(); }
void reset_network_counter() { g_networks_simulated.store(0); }

void SimConfig::validate() const {
    if (n < 1) throw std::invalid_argument("SimConfig: n must be positive");
    if (iterations < 1) throw std::invalid_argument("SimConfig: iterations must be >= 1");
    if (thin < 1) throw std::invalid_argument("SimConfig: thin must be >= 1");
    if (init == InitKind::given) {
        if (!init_graph) throw std::invalid_argument("SimConfig: init graph missing");
        if (init_graph->vertex_count() != n) {
            throw std::invalid_argument("SimConfig: init graph size mismatch");
        }
    }
}

Graph SimConfig::make_initial() const {
    switch (init) {
        case InitKind::empty: return Graph(n);
        case InitKind::full: return Graph::complete(n);
        case InitKind::given: return *init_graph;
    }
    throw std::invalid_argument("SimConfig: unknown init kind");
}

double log_unnorm_density(const ThetaVector& theta, const StatsVector& h) {
    if (theta.size() != h.size()) {
        throw std::invalid_argument("log_unnorm_density: dimension mismatch");
    }
    return dot(theta, h);
}

bool mh_step_inplace(Graph& g, const ThetaVector& theta, const StatsConfig& cfg,
                     Rng& rng, ChangeStatsScratch& scratch) {
    if (static_cast<int>(theta.size()) != cfg.dim()) {
        throw std::invalid_argument("mh_step: theta dimension mismatch");
    }
    const int n = g.vertex_count();
    const int i = static_cast<int>(rng.uniform_below(n));
    int j = static_cast<int>(rng.uniform_below(n - 1));
    if (j >= i) ++j;

    double delta[3];
    std::span<double> dh(delta, theta.size());
    change_stats(g, i, j, cfg, dh, scratch);
    const double log_ratio = dot(theta, dh);
    const bool accept = log_ratio >= 0.0 || rng.uniform() < std::exp(log_ratio);
    if (accept) g.toggle(i, j);
    return accept;
}

Graph mh_step(const Graph& g, const ThetaVector& theta, const StatsConfig& cfg, Rng& rng) {
    Graph next = g;
    ChangeStatsScratch scratch;
    mh_step_inplace(next, theta, cfg, rng, scratch);
    return next;
}

void run_mh(Graph& g, const ThetaVector& theta, const StatsConfig& cfg,
            std::int64_t iterations, Rng& rng) {
    ChangeStatsScratch scratch;
    for (std::int64_t t = 0; t < iterations; ++t) {
        mh_step_inplace(g, theta, cfg, rng, scratch);
    }
}

Graph simulate_network(const ThetaVector& theta, const StatsConfig& stats, const SimConfig& cfg) {
    cfg.validate();
    Graph g = cfg.make_initial();
    Rng rng(cfg.seed);
    run_mh(g, theta, stats, cfg.iterations, rng);
    g_networks_simulated.fetch_add(1, std::memory_order_relaxed);
    return g;
}

std::vector<StatsVector> simulate_stats_trace(const ThetaVector& theta, const StatsConfig& stats,
                                              const SimConfig& cfg) {
    cfg.validate();
    Graph g = cfg.make_initial();
    Rng rng(cfg.seed);
    ChangeStatsScratch scratch;
    std::vector<StatsVector> trace;
    trace.reserve(static_cast<std::size_t>(cfg.iterations / cfg.thin));
    for (std::int64_t t = 1; t <= cfg.iterations; ++t) {
        mh_step_inplace(g, theta, stats, rng, scratch);
        if (t % cfg.thin == 0) trace.push_back(summary_stats(g, stats));
    }
    g_networks_simulated.fetch_add(1, std::memory_order_relaxed);
    return trace;
}

void TrainingSet::push(std::span<const double> theta, std::span<const double> x, int round) {
    if (rounds.empty() && theta_dim == 0 && x_dim == 0) {
        theta_dim = static_cast<int>(theta.size());
        x_dim = static_cast<int>(x.size());
    }
    if (static_cast<int>(theta.size()) != theta_dim || static_cast<int>(x.size()) != x_dim) {
        throw std::invalid_argument("TrainingSet: row dimension mismatch");
    }
    thetas.insert(thetas.end(), theta.begin(), theta.end());
    xs.insert(xs.end(), x.begin(), x.end());
    rounds.push_back(round);
}

void TrainingSet::append(const TrainingSet& other) {
    if (other.size() == 0) return;
    if (size() == 0) {
        *this = other;
        return;
    }
    if (other.theta_dim != theta_dim || other.x_dim != x_dim) {
        throw std::invalid_argument("TrainingSet: append dimension mismatch");
    }
    thetas.insert(thetas.end(), other.thetas.begin(), other.thetas.end());
    xs.insert(xs.end(), other.xs.begin(), other.xs.end());
    rounds.insert(rounds.end(), other.rounds.begin(), other.rounds.end());
}

namespace {

TrainingSet batch_impl(std::span<const ThetaVector> thetas, const StatsConfig& stats,
                       const SimConfig& cfg, int round, int workers, bool parallel) {
    cfg.validate();
    const std::size_t count = thetas.size();
    const int p = stats.dim();
    TrainingSet out;
    out.theta_dim = p;
    out.x_dim = p;
    out.thetas.assign(count * p, 0.0);
    out.xs.assign(count * p, 0.0);
    out.rounds.assign(count, round);

    const auto work = [&](std::size_t b) {
        SimConfig item = cfg;
        item.seed = item_seed(cfg.seed, b);
        const Graph g = simulate_network(thetas[b], stats, item);
        const StatsVector x = summary_stats(g, stats);
        for (int k = 0; k < p; ++k) {
            out.thetas[b * p + k] = thetas[b][k];
            out.xs[b * p + k] = x[k];
        }
    };

    if (parallel) {
#ifdef _OPENMP
        if (workers > 0) {
#pragma omp parallel for schedule(dynamic) num_threads(workers)
            for (std::int64_t b = 0; b < static_cast<std::int64_t>(count); ++b) {
                work(static_cast<std::size_t>(b));
            }
        } else {
#pragma omp parallel for schedule(dynamic)
            for (std::int64_t b = 0; b < static_cast<std::int64_t>(count); ++b) {
                work(static_cast<std::size_t>(b));
            }
        }
#else
        (void)workers;
        for (std::size_t b = 0; b < count; ++b) work(b);
#endif
    } else {
        for (std::size_t b = 0; b < count; ++b) work(b);
    }
    return out;
}

}  // namespace

TrainingSet simulate_stats_batch(std::span<const ThetaVector> thetas, const StatsConfig& stats,
                                 const SimConfig& cfg, int round, int workers) {
    return batch_impl(thetas, stats, cfg, round, workers, true);
}

TrainingSet simulate_stats_batch_serial(std::span<const ThetaVector> thetas,
                                        const StatsConfig& stats, const SimConfig& cfg,
                                        int round) {
    return batch_impl(thetas, stats, cfg, round, 0, false);
}

}  // namespace ergm
