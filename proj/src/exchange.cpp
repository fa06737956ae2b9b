#include "ergm/exchange.hpp"

#include <cmath>
#include <stdexcept>

#include "ergm/numeric.hpp"

namespace ergm {

double PosteriorChain::acceptance_rate() const {
    if (accepted.empty()) return 0.0;
    double acc = 0.0;
    for (auto a : accepted) acc += a;
    return acc / static_cast<double>(accepted.size());
}

ThetaVector PosteriorChain::posterior_mean() const {
    if (samples.empty()) throw std::invalid_argument("PosteriorChain: empty chain");
    const std::size_t first = static_cast<std::size_t>(burn_in) + 1;
    if (first >= samples.size()) throw std::invalid_argument("PosteriorChain: burn-in leaves no samples");
    const std::size_t dim = samples[0].size();
    ThetaVector mean(dim, 0.0);
    for (std::size_t t = first; t < samples.size(); ++t) {
        for (std::size_t k = 0; k < dim; ++k) mean[k] += samples[t][k];
    }
    const double count = static_cast<double>(samples.size() - first);
    for (double& v : mean) v /= count;
    return mean;
}

ThetaVector PosteriorChain::posterior_sd() const {
    const ThetaVector mean = posterior_mean();
    const std::size_t first = static_cast<std::size_t>(burn_in) + 1;
    const std::size_t dim = mean.size();
    ThetaVector acc(dim, 0.0);
    for (std::size_t t = first; t < samples.size(); ++t) {
        for (std::size_t k = 0; k < dim; ++k) {
            const double d = samples[t][k] - mean[k];
            acc[k] += d * d;
        }
    }
    const double count = static_cast<double>(samples.size() - first);
    for (double& v : acc) v = count > 1 ? std::sqrt(v / (count - 1)) : 0.0;
    return acc;
}

double exchange_log_accept(const ThetaVector& theta, const ThetaVector& proposed,
                           const StatsVector& x_obs, const StatsVector& x_aux,
                           const PriorSpec& prior) {
    if (theta.size() != proposed.size() || x_obs.size() != x_aux.size() ||
        theta.size() != x_obs.size()) {
        throw std::invalid_argument("exchange_log_accept: dimension mismatch");
    }
    double data_term = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
        data_term += (proposed[k] - theta[k]) * (x_obs[k] - x_aux[k]);
    }
    return data_term + log_prior(proposed, prior) - log_prior(theta, prior);
}

ExchangeStepResult exchange_step(const ThetaVector& theta, const StatsVector& x_obs,
                                 const PriorSpec& prior, const ProposalSpec& prop,
                                 const StatsConfig& stats, const SimConfig& sim, Rng& rng,
                                 Graph* aux_state) {
    const CholFactor prop_chol = cholesky(prop.covariance);
    const ThetaVector proposed = sample_mvn(theta, prop_chol, rng);

    StatsVector x_aux;
    if (aux_state != nullptr) {
        run_mh(*aux_state, proposed, stats, sim.iterations, rng);
        x_aux = summary_stats(*aux_state, stats);
    } else {
        Graph aux = sim.make_initial();
        run_mh(aux, proposed, stats, sim.iterations, rng);
        x_aux = summary_stats(aux, stats);
    }

    const double log_ratio = exchange_log_accept(theta, proposed, x_obs, x_aux, prior);
    const bool accept = log_ratio >= 0.0 || rng.uniform() < std::exp(log_ratio);
    return {accept ? proposed : theta, accept};
}

PosteriorChain run_exchange(const StatsVector& x_obs, const PriorSpec& prior,
                            const ProposalSpec& prop, const StatsConfig& stats,
                            const SimConfig& sim, const ExchangeConfig& cfg) {
    if (cfg.burn_in < 0 || cfg.chain_length <= cfg.burn_in) {
        throw std::invalid_argument("run_exchange: require T > burn_in >= 0");
    }
    sim.validate();
    prior.validate();

    Rng rng(cfg.seed);
    PosteriorChain chain;
    chain.burn_in = cfg.burn_in;
    chain.samples.reserve(static_cast<std::size_t>(cfg.chain_length) + 1);
    chain.accepted.reserve(static_cast<std::size_t>(cfg.chain_length));

    ThetaVector theta = sample_prior(prior, rng);
    chain.samples.push_back(theta);

    Graph aux = sim.make_initial();
    Graph* aux_ptr = cfg.reuse_aux_graph ? &aux : nullptr;
    for (int t = 0; t < cfg.chain_length; ++t) {
        ExchangeStepResult step = exchange_step(theta, x_obs, prior, prop, stats, sim, rng, aux_ptr);
        theta = std::move(step.theta);
        chain.samples.push_back(theta);
        chain.accepted.push_back(step.accepted ? 1 : 0);
    }
    return chain;
}

}  // namespace ergm
