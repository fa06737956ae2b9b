#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ergm/graph.hpp"
#include "ergm/rng.hpp"

namespace ergm {

enum class InitKind { empty, full, given };

struct SimConfig {
    int n = 16;                       // vertex count for empty/full init
    std::int64_t iterations = 50000;  // MH toggle proposals per realisation
    InitKind init = InitKind::empty;
    std::optional<Graph> init_graph;  // required when init == given
    std::uint64_t seed = 0;
    std::int64_t thin = 1;            // trace recording stride

    void validate() const;
    Graph make_initial() const;
};

// theta . h  (numerator of the model density, in log space).
double log_unnorm_density(const ThetaVector& theta, const StatsVector& h);

// One Metropolis-Hastings toggle: proposes a uniformly random unordered pair,
// accepts with probability min(1, exp(theta . dh)). The proposal is symmetric
// so its terms cancel. Mutates g; returns whether the toggle was accepted.
bool mh_step_inplace(Graph& g, const ThetaVector& theta, const StatsConfig& cfg,
                     Rng& rng, ChangeStatsScratch& scratch);

// Pure variant returning the next state.
Graph mh_step(const Graph& g, const ThetaVector& theta, const StatsConfig& cfg, Rng& rng);

// Runs `iterations` MH steps on g in place.
void run_mh(Graph& g, const ThetaVector& theta, const StatsConfig& cfg,
            std::int64_t iterations, Rng& rng);

// Full realisation: initialise per cfg, run cfg.iterations steps, return the
// final state. Deterministic given cfg.seed.
Graph simulate_network(const ThetaVector& theta, const StatsConfig& stats, const SimConfig& cfg);

// Trace of summary statistics recorded every cfg.thin steps (after the step).
std::vector<StatsVector> simulate_stats_trace(const ThetaVector& theta, const StatsConfig& stats,
                                              const SimConfig& cfg);

// Paired (theta_b, x_b) draws with provenance.
struct TrainingSet {
    int theta_dim = 0;
    int x_dim = 0;
    std::vector<double> thetas;  // row-major, size() * theta_dim
    std::vector<double> xs;      // row-major, size() * x_dim
    std::vector<int> rounds;

    std::size_t size() const { return rounds.size(); }
    std::span<const double> theta_row(std::size_t b) const {
        return {thetas.data() + b * theta_dim, static_cast<std::size_t>(theta_dim)};
    }
    std::span<const double> x_row(std::size_t b) const {
        return {xs.data() + b * x_dim, static_cast<std::size_t>(x_dim)};
    }
    void push(std::span<const double> theta, std::span<const double> x, int round);
    void append(const TrainingSet& other);
};

// One independent realisation per theta; item b uses seed
// item_seed(cfg.seed, b), so the batch equals the concatenation of
// single-theta calls and is identical for any worker count.
TrainingSet simulate_stats_batch(std::span<const ThetaVector> thetas, const StatsConfig& stats,
                                 const SimConfig& cfg, int round = 0, int workers = 0);

// Serial reference for the batch kernel; bit-identical to the parallel path.
TrainingSet simulate_stats_batch_serial(std::span<const ThetaVector> thetas,
                                        const StatsConfig& stats, const SimConfig& cfg,
                                        int round = 0);

// Process-wide count of simulate_network realisations (amortisation checks).
std::uint64_t networks_simulated();
void reset_network_counter();

}  // namespace ergm
