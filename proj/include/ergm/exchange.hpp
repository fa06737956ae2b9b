#pragma once

#include <cstdint>
#include <vector>

#include "ergm/mvn.hpp"
#include "ergm/sim.hpp"

namespace ergm {

struct PosteriorChain {
    std::vector<ThetaVector> samples;   // length T+1, samples[0] is the initial draw
    std::vector<std::uint8_t> accepted; // length T
    int burn_in = 0;

    double acceptance_rate() const;
    // Mean/sd over samples with index > burn_in.
    ThetaVector posterior_mean() const;
    ThetaVector posterior_sd() const;
};

// log of the exchange acceptance ratio: the normalising constants of the two
// model densities cancel against the auxiliary draw, leaving
// (theta' - theta) . (x_obs - x_aux) + log pi(theta') - log pi(theta).
double exchange_log_accept(const ThetaVector& theta, const ThetaVector& proposed,
                           const StatsVector& x_obs, const StatsVector& x_aux,
                           const PriorSpec& prior);

struct ExchangeStepResult {
    ThetaVector theta;
    bool accepted = false;
};

// One exchange move: propose theta' ~ N(theta, Sigma), simulate an auxiliary
// network at theta', accept per exchange_log_accept. When aux_state is given
// it is used as the auxiliary chain's initial graph and updated in place;
// otherwise each auxiliary simulation starts fresh from cfg.init.
ExchangeStepResult exchange_step(const ThetaVector& theta, const StatsVector& x_obs,
                                 const PriorSpec& prior, const ProposalSpec& prop,
                                 const StatsConfig& stats, const SimConfig& sim, Rng& rng,
                                 Graph* aux_state = nullptr);

struct ExchangeConfig {
    int chain_length = 7000;  // T
    int burn_in = 1000;
    bool reuse_aux_graph = false;
    std::uint64_t seed = 0;
};

PosteriorChain run_exchange(const StatsVector& x_obs, const PriorSpec& prior,
                            const ProposalSpec& prop, const StatsConfig& stats,
                            const SimConfig& sim, const ExchangeConfig& cfg);

}  // namespace ergm
