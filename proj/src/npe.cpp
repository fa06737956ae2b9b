#include "ergm/npe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ergm/numeric.hpp"

namespace ergm {

namespace {
constexpr std::uint64_t kPriorDrawTag = 0x7072696fULL;
constexpr std::uint64_t kProposalTag = 0x70726f70ULL;
constexpr std::uint64_t kDiagTag = 0x64696167ULL;
constexpr std::uint64_t kSampleTag = 0x73616d70ULL;
}  // namespace

void NpeConfig::validate() const {
    if (B < 1) throw std::invalid_argument("NpeConfig: B must be >= 1");
    if (batch_size < 1 || B < batch_size) {
        throw std::invalid_argument("NpeConfig: require B >= batch_size >= 1");
    }
    if (validation_fraction < 0.0 || validation_fraction > 0.5) {
        throw std::invalid_argument("NpeConfig: validation_fraction must lie in [0, 0.5]");
    }
    if (epochs < 0) throw std::invalid_argument("NpeConfig: negative epochs");
    if (learning_rate <= 0.0) throw std::invalid_argument("NpeConfig: learning_rate must be > 0");
}

void SnpeConfig::validate() const {
    base.validate();
    if (rounds < 1) throw std::invalid_argument("SnpeConfig: rounds must be >= 1");
    if (per_round_B < 1) throw std::invalid_argument("SnpeConfig: per_round_B must be >= 1");
    if (atoms_per_batch < 2) throw std::invalid_argument("SnpeConfig: atoms_per_batch must be >= 2");
    if (atoms_per_batch > base.batch_size) {
        throw std::invalid_argument("SnpeConfig: atoms_per_batch must be <= batch_size");
    }
}

TrainingSet simulate_prior_round(const PriorSpec& prior, int B, const StatsConfig& stats,
                                 const SimConfig& sim, int workers) {
    if (B < 1) throw std::invalid_argument("simulate_prior_round: B must be >= 1");
    prior.validate();
    const CholFactor chol = cholesky(prior.covariance);
    Rng rng(mix_seed(sim.seed, kPriorDrawTag));
    std::vector<ThetaVector> thetas;
    thetas.reserve(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) thetas.push_back(sample_mvn(prior.mean, chol, rng));
    return simulate_stats_batch(thetas, stats, sim, /*round=*/0, workers);
}

namespace {

flow::FitConfig fit_config_from(const NpeConfig& cfg) {
    flow::FitConfig fc;
    fc.epochs = cfg.epochs;
    fc.batch_size = cfg.batch_size;
    fc.learning_rate = cfg.learning_rate;
    fc.validation_fraction = cfg.validation_fraction;
    fc.early_stop_patience = cfg.early_stop_patience;
    fc.seed = cfg.seed;
    fc.workers = cfg.workers;
    return fc;
}

}  // namespace

TrainedNpe train_npe(const TrainingSet& data, const StatsConfig& stats, const NpeConfig& cfg) {
    cfg.validate();
    if (data.size() == 0) throw std::invalid_argument("train_npe: empty training set");
    for (int round : data.rounds) {
        if (round != 0) {
            throw std::invalid_argument("train_npe: amortised NPE expects prior-round (round 0) data");
        }
    }
    if (data.theta_dim != stats.dim() || data.x_dim != stats.dim()) {
        throw std::invalid_argument("train_npe: data dimension mismatch");
    }

    TrainedNpe out;
    out.model = flow::make_maf(data.theta_dim, data.x_dim, cfg.flow, cfg.seed);
    out.model.standardizer =
        flow::Standardizer::fit(data.thetas, data.xs, data.theta_dim, data.x_dim);
    out.history = flow::fit_maf(out.model, data, fit_config_from(cfg));
    return out;
}

double atomic_log_prob_from_scores(std::span<const double> scores, std::size_t index) {
    if (index >= scores.size()) throw std::invalid_argument("atomic_log_prob: bad atom index");
    return scores[index] - logsumexp(scores);
}

double atomic_log_prob(const flow::MafModel& model, const ThetaVector& theta,
                       const StatsVector& x, const std::vector<ThetaVector>& atoms,
                       const PriorSpec& prior) {
    if (atoms.size() < 2) throw std::invalid_argument("atomic_log_prob: need at least 2 atoms");
    std::size_t index = atoms.size();
    for (std::size_t a = 0; a < atoms.size(); ++a) {
        if (atoms[a] == theta) {
            index = a;
            break;
        }
    }
    if (index == atoms.size()) {
        throw std::invalid_argument("atomic_log_prob: theta is not a member of the atom set");
    }
    const CholFactor chol = cholesky(prior.covariance);
    std::vector<double> scores(atoms.size());
    for (std::size_t a = 0; a < atoms.size(); ++a) {
        scores[a] = flow::maf_log_prob(model, atoms[a], x) -
                    log_mvn_density(atoms[a], prior.mean, chol);
    }
    return atomic_log_prob_from_scores(scores, index);
}

namespace {

// Posterior mean/sd at x_obs from diagnostic draws, plus the prior-box
// rejection fraction observed while drawing.
void snpe_round_diag(const flow::MafModel& model, const StatsVector& x_obs,
                     const PriorSpec& prior, std::uint64_t seed, SnpeRoundDiag& diag) {
    constexpr int kDiagDraws = 4000;
    Rng rng(seed);
    const std::vector<ThetaVector> draws = flow::maf_sample(model, x_obs, kDiagDraws, rng);
    const int p = static_cast<int>(prior.mean.size());
    std::vector<double> sd_prior(p);
    for (int k = 0; k < p; ++k) sd_prior[k] = std::sqrt(prior.covariance(k, k));

    diag.posterior_mean.assign(p, 0.0);
    diag.posterior_sd.assign(p, 0.0);
    std::int64_t outside = 0;
    for (const ThetaVector& draw : draws) {
        bool in_box = true;
        for (int k = 0; k < p; ++k) {
            diag.posterior_mean[k] += draw[k];
            if (std::abs(draw[k] - prior.mean[k]) > 6.0 * sd_prior[k]) in_box = false;
        }
        if (!in_box) ++outside;
    }
    for (double& v : diag.posterior_mean) v /= kDiagDraws;
    for (const ThetaVector& draw : draws) {
        for (int k = 0; k < p; ++k) {
            const double d = draw[k] - diag.posterior_mean[k];
            diag.posterior_sd[k] += d * d;
        }
    }
    for (double& v : diag.posterior_sd) v = std::sqrt(v / (kDiagDraws - 1));
    diag.leakage_fraction = static_cast<double>(outside) / kDiagDraws;
}

}  // namespace

SnpeResult train_snpe(const SnpeConfig& cfg, const PriorSpec& prior, const StatsConfig& stats,
                      const SimConfig& sim, const SnpeRoundObserver& on_round) {
    cfg.validate();
    prior.validate();
    if (static_cast<int>(cfg.x_obs.size()) != stats.dim()) {
        throw std::invalid_argument("train_snpe: x_obs dimension mismatch");
    }

    SnpeResult result;

    // Round 1: prior-round data, plain NLL. Seeds match train_npe exactly so
    // a single-round SNPE reproduces the amortised fit bit for bit.
    NpeConfig round_cfg = cfg.base;
    round_cfg.B = cfg.per_round_B;
    SimConfig round_sim = sim;
    result.data = simulate_prior_round(prior, cfg.per_round_B, stats, round_sim, cfg.base.workers);
    TrainedNpe first = train_npe(result.data, stats, round_cfg);
    result.model = std::move(first.model);

    {
        SnpeRoundDiag diag;
        diag.round = 1;
        diag.cumulative_pairs = result.data.size();
        diag.history = std::move(first.history);
        snpe_round_diag(result.model, cfg.x_obs, prior, mix_seed(cfg.base.seed, kDiagTag, 1),
                        diag);
        if (on_round) on_round(diag, result.model);
        result.rounds.push_back(std::move(diag));
    }

    for (int round = 2; round <= cfg.rounds; ++round) {
        // Proposal draws from the current posterior estimate at x_obs.
        Rng prop_rng(mix_seed(cfg.base.seed, kProposalTag, static_cast<std::uint64_t>(round)));
        const std::vector<ThetaVector> proposals =
            flow::maf_sample(result.model, cfg.x_obs, cfg.per_round_B, prop_rng);

        SimConfig sim_round = sim;
        sim_round.seed = mix_seed(sim.seed, kProposalTag, static_cast<std::uint64_t>(round));
        result.data.append(simulate_stats_batch(proposals, stats, sim_round, round - 1,
                                                cfg.base.workers));

        flow::FitConfig fc = fit_config_from(cfg.base);
        fc.seed = mix_seed(cfg.base.seed, 0x726f756eULL, static_cast<std::uint64_t>(round));
        fc.atoms_per_batch = cfg.atoms_per_batch;
        fc.prior = &prior;
        flow::TrainHistory history = flow::fit_maf(result.model, result.data, fc);

        SnpeRoundDiag diag;
        diag.round = round;
        diag.cumulative_pairs = result.data.size();
        diag.history = std::move(history);
        snpe_round_diag(result.model, cfg.x_obs, prior,
                        mix_seed(cfg.base.seed, kDiagTag, static_cast<std::uint64_t>(round)), diag);
        if (on_round) on_round(diag, result.model);
        result.rounds.push_back(std::move(diag));
    }
    return result;
}

PosteriorSamples posterior_sample(const flow::MafModel& model, const StatsVector& x_obs,
                                  int count, const PriorSpec& prior, bool truncate,
                                  std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("posterior_sample: count must be >= 1");
    Rng rng(mix_seed(seed, kSampleTag));
    PosteriorSamples out;
    if (!truncate) {
        out.samples = flow::maf_sample(model, x_obs, count, rng);
        return out;
    }

    const int p = static_cast<int>(prior.mean.size());
    std::vector<double> lo(p), hi(p);
    for (int k = 0; k < p; ++k) {
        const double sd = std::sqrt(prior.covariance(k, k));
        lo[k] = prior.mean[k] - 6.0 * sd;
        hi[k] = prior.mean[k] + 6.0 * sd;
    }

    std::int64_t attempts = 0;
    out.samples.reserve(static_cast<std::size_t>(count));
    constexpr std::int64_t kMinAttemptsForVerdict = 10000;
    while (static_cast<int>(out.samples.size()) < count) {
        const int want = count - static_cast<int>(out.samples.size());
        const std::vector<ThetaVector> draws = flow::maf_sample(model, x_obs, want, rng);
        for (const ThetaVector& draw : draws) {
            ++attempts;
            bool in_box = true;
            for (int k = 0; k < p; ++k) {
                if (draw[k] < lo[k] || draw[k] > hi[k]) {
                    in_box = false;
                    break;
                }
            }
            if (in_box) out.samples.push_back(draw);
        }
        const double rejected =
            1.0 - static_cast<double>(out.samples.size()) / static_cast<double>(attempts);
        if (attempts >= kMinAttemptsForVerdict && rejected > 0.99) {
            throw LeakageError("posterior_sample: rejection rate above 99%, degenerate fit");
        }
    }
    out.rejection_fraction =
        1.0 - static_cast<double>(count) / static_cast<double>(std::max<std::int64_t>(attempts, 1));
    return out;
}

}  // namespace ergm
