#include "ergm/harness.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ergm/numeric.hpp"

namespace ergm {

namespace {
constexpr std::uint64_t kTruthTag = 0x74727574ULL;
constexpr std::uint64_t kObsTag = 0x6f627376ULL;
constexpr std::uint64_t kPostTag = 0x706f7374ULL;
constexpr std::uint64_t kPredTag = 0x70726564ULL;
constexpr std::uint64_t kTrueSetTag = 0x74736574ULL;
constexpr std::uint64_t kChainTag = 0x6368616eULL;
}  // namespace

std::array<StratumBounds, 4> edge_strata(int n) {
    if (n < 2) throw std::invalid_argument("edge_strata: need n >= 2");
    const double reference_pairs = 90.0 * 89.0 / 2.0;
    const double scale = (static_cast<double>(n) * (n - 1) / 2.0) / reference_pairs;
    std::array<StratumBounds, 4> strata;
    const double edges[5] = {0.0, 275.0, 550.0, 825.0, 1100.0};
    for (int s = 0; s < 4; ++s) {
        strata[s] = {edges[s] * scale, edges[s + 1] * scale};
    }
    return strata;
}

std::vector<EvalCase> stratified_truths(const TruthSamplerConfig& cfg, const StatsConfig& stats,
                                        const SimConfig& sim) {
    if (static_cast<int>(cfg.box.bounds.size()) != stats.dim()) {
        throw std::invalid_argument("stratified_truths: search box dimension mismatch");
    }
    if (cfg.pilot_sims < 1) throw std::invalid_argument("stratified_truths: pilot_sims >= 1");
    const auto strata = edge_strata(sim.n);

    std::vector<EvalCase> cases;
    int case_id = 0;
    std::uint64_t draw = 0;
    Rng rng(mix_seed(cfg.seed, kTruthTag));
    for (int s = 0; s < 4; ++s) {
        int found = 0;
        int attempts = 0;
        while (found < cfg.target_counts[s]) {
            if (attempts++ >= cfg.attempt_budget) {
                throw std::runtime_error("stratified_truths: attempt budget exhausted for stratum " +
                                         std::to_string(s));
            }
            ThetaVector theta(stats.dim());
            for (int k = 0; k < stats.dim(); ++k) {
                const auto& [lo, hi] = cfg.box.bounds[k];
                theta[k] = lo + (hi - lo) * rng.uniform();
            }
            // Pilot: average edge count over a few short realisations.
            double mean_edges = 0.0;
            for (int pilot = 0; pilot < cfg.pilot_sims; ++pilot) {
                SimConfig pilot_sim = sim;
                pilot_sim.seed = mix_seed(cfg.seed, kTruthTag, ++draw);
                const Graph g = simulate_network(theta, stats, pilot_sim);
                mean_edges += static_cast<double>(g.edge_count());
            }
            mean_edges /= cfg.pilot_sims;
            if (mean_edges >= strata[s].lo && mean_edges < strata[s].hi) {
                cases.push_back({std::move(theta), s, case_id++});
                ++found;
            }
        }
    }
    return cases;
}

ThetaVector point_estimate(std::span<const ThetaVector> posterior) {
    if (posterior.empty()) throw std::invalid_argument("point_estimate: empty sample");
    ThetaVector mean(posterior[0].size(), 0.0);
    for (const ThetaVector& draw : posterior) {
        if (draw.size() != mean.size()) {
            throw std::invalid_argument("point_estimate: ragged samples");
        }
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += draw[k];
    }
    for (double& v : mean) v /= static_cast<double>(posterior.size());
    return mean;
}

BiasReport bias_metrics(const std::vector<ThetaVector>& truths,
                        const std::vector<ThetaVector>& estimates) {
    if (truths.empty() || truths.size() != estimates.size()) {
        throw std::invalid_argument("bias_metrics: need equal nonempty truth/estimate lists");
    }
    const std::size_t dim = truths[0].size();
    BiasReport report;
    report.me.assign(dim, 0.0);
    report.mae.assign(dim, 0.0);
    report.rmse.assign(dim, 0.0);
    report.case_estimates = estimates;
    for (std::size_t k_case = 0; k_case < truths.size(); ++k_case) {
        if (truths[k_case].size() != dim || estimates[k_case].size() != dim) {
            throw std::invalid_argument("bias_metrics: ragged inputs");
        }
        for (std::size_t k = 0; k < dim; ++k) {
            const double err = truths[k_case][k] - estimates[k_case][k];
            report.me[k] += err;
            report.mae[k] += std::abs(err);
            report.rmse[k] += err * err;
        }
    }
    const double count = static_cast<double>(truths.size());
    for (std::size_t k = 0; k < dim; ++k) {
        report.me[k] /= count;
        report.mae[k] /= count;
        report.rmse[k] = std::sqrt(report.rmse[k] / count);
    }
    return report;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile: empty sample");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

MagnitudeEntry magnitude_classify(const std::vector<StatsVector>& x_true_samples,
                                  const std::vector<StatsVector>& x_pred_samples) {
    if (x_true_samples.empty() || x_pred_samples.empty()) {
        throw std::invalid_argument("magnitude_classify: empty sample sets");
    }
    const std::size_t dim = x_true_samples[0].size();
    MagnitudeEntry entry;
    entry.small_bias.assign(dim, 0);
    entry.coverage_pct.assign(dim, 0.0);

    std::vector<double> column(x_true_samples.size());
    for (std::size_t k = 0; k < dim; ++k) {
        for (std::size_t r = 0; r < x_true_samples.size(); ++r) column[r] = x_true_samples[r][k];
        const double q05 = quantile(column, 0.05);
        const double q95 = quantile(column, 0.95);

        double pred_mean = 0.0;
        std::int64_t inside = 0;
        for (const StatsVector& row : x_pred_samples) {
            pred_mean += row[k];
            if (row[k] >= q05 && row[k] <= q95) ++inside;
        }
        pred_mean /= static_cast<double>(x_pred_samples.size());
        entry.small_bias[k] = pred_mean >= q05 && pred_mean <= q95 ? 1 : 0;
        entry.coverage_pct[k] =
            100.0 * static_cast<double>(inside) / static_cast<double>(x_pred_samples.size());
    }
    return entry;
}

namespace {

StatsVector simulate_observation(const ThetaVector& theta, const StatsConfig& stats,
                                 const SimConfig& sim, std::uint64_t seed) {
    SimConfig cfg = sim;
    cfg.seed = seed;
    return summary_stats(simulate_network(theta, stats, cfg), stats);
}

}  // namespace

std::pair<BiasReport, MagnitudeReport> run_bias_eval(const std::vector<EvalCase>& cases,
                                                     const flow::MafModel& model,
                                                     const StatsConfig& stats,
                                                     const SimConfig& sim,
                                                     const BiasEvalSettings& settings) {
    if (cases.empty()) throw std::invalid_argument("run_bias_eval: no cases");
    if (settings.replicates < 1) throw std::invalid_argument("run_bias_eval: replicates >= 1");

    const int M = settings.replicates;
    const std::size_t n_cases = cases.size();
    std::vector<ThetaVector> truths(n_cases);
    std::vector<ThetaVector> estimates(n_cases);
    MagnitudeReport magnitude;
    magnitude.cases.resize(n_cases);

    // Replicate estimates per case; each (case, replicate) task owns its
    // seeds, so results are independent of scheduling.
    for (std::size_t c = 0; c < n_cases; ++c) {
        truths[c] = cases[c].theta_true;
        std::vector<ThetaVector> replicate_means(M);
        // Seeds key on the case id, so a report is insensitive to the order
        // in which cases are passed.
        const std::uint64_t cid = static_cast<std::uint64_t>(cases[c].case_id);

        const auto replicate_work = [&](int m) {
            const std::uint64_t obs_seed =
                mix_seed(settings.seed, kObsTag, (cid << 20) + static_cast<std::uint64_t>(m));
            const StatsVector x_m = simulate_observation(cases[c].theta_true, stats, sim, obs_seed);
            Rng post_rng(mix_seed(settings.seed, kPostTag, (cid << 20) + static_cast<std::uint64_t>(m)));
            const std::vector<ThetaVector> draws =
                flow::maf_sample(model, x_m, settings.posterior_draws, post_rng);
            replicate_means[m] = point_estimate(draws);
        };
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(settings.workers > 0 ? settings.workers : omp_get_max_threads())
        for (int m = 0; m < M; ++m) replicate_work(m);
#else
        for (int m = 0; m < M; ++m) replicate_work(m);
#endif
        estimates[c] = point_estimate(replicate_means);

        // Posterior predictive: prediction draws from each replicate's point
        // estimate against fresh draws from the true parameter.
        std::vector<StatsVector> x_true(settings.true_draws);
        for (int r = 0; r < settings.true_draws; ++r) {
            x_true[r] = simulate_observation(cases[c].theta_true, stats, sim,
                                             mix_seed(settings.seed, kTrueSetTag,
                                                      (cid << 20) + static_cast<std::uint64_t>(r)));
        }
        std::vector<StatsVector> x_pred;
        x_pred.reserve(static_cast<std::size_t>(M) * settings.pred_per_replicate);
        for (int m = 0; m < M; ++m) {
            for (int r = 0; r < settings.pred_per_replicate; ++r) {
                x_pred.push_back(simulate_observation(
                    replicate_means[m], stats, sim,
                    mix_seed(settings.seed, kPredTag,
                             (cid << 40) + (static_cast<std::uint64_t>(m) << 20) +
                                 static_cast<std::uint64_t>(r))));
            }
        }
        magnitude.cases[c] = magnitude_classify(x_true, x_pred);
    }

    return {bias_metrics(truths, estimates), magnitude};
}

ComparePairs compare_estimators(const EvalCase& eval_case, const StatsConfig& stats,
                                const SimConfig& sim, int replicates, std::uint64_t seed,
                                int workers, const PointEstimator& method_a,
                                const PointEstimator& method_b) {
    if (replicates < 1) throw std::invalid_argument("compare: replicates >= 1");
    ComparePairs pairs;
    pairs.npe_means.resize(replicates);
    pairs.exchange_means.resize(replicates);

    const auto work = [&](int m) {
        const std::uint64_t obs_seed = mix_seed(seed, kObsTag, static_cast<std::uint64_t>(m));
        const StatsVector x_m = simulate_observation(eval_case.theta_true, stats, sim, obs_seed);
        pairs.npe_means[m] = method_a(x_m, mix_seed(seed, kPostTag, static_cast<std::uint64_t>(m)));
        pairs.exchange_means[m] =
            method_b(x_m, mix_seed(seed, kChainTag, static_cast<std::uint64_t>(m)));
    };
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers > 0 ? workers : omp_get_max_threads())
    for (int m = 0; m < replicates; ++m) work(m);
#else
    (void)workers;
    for (int m = 0; m < replicates; ++m) work(m);
#endif
    return pairs;
}

ComparePairs compare_methods(const EvalCase& eval_case, const flow::MafModel& model,
                             const PriorSpec& prior, const ProposalSpec& prop,
                             const ExchangeConfig& exchange_cfg, const StatsConfig& stats,
                             const SimConfig& sim, const CompareSettings& settings) {
    const PointEstimator npe = [&](const StatsVector& x_obs, std::uint64_t seed) {
        Rng rng(seed);
        return point_estimate(flow::maf_sample(model, x_obs, settings.posterior_draws, rng));
    };
    const PointEstimator exchange = [&](const StatsVector& x_obs, std::uint64_t seed) {
        ExchangeConfig cfg = exchange_cfg;
        cfg.seed = seed;
        return run_exchange(x_obs, prior, prop, stats, sim, cfg).posterior_mean();
    };
    return compare_estimators(eval_case, stats, sim, settings.replicates, settings.seed,
                              settings.workers, npe, exchange);
}

double wilcoxon_rank_sum_p(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("wilcoxon: empty sample");
    struct Tagged {
        double value;
        int group;
    };
    std::vector<Tagged> all;
    all.reserve(a.size() + b.size());
    for (double v : a) all.push_back({v, 0});
    for (double v : b) all.push_back({v, 1});
    std::sort(all.begin(), all.end(), [](const Tagged& x, const Tagged& y) {
        return x.value < y.value;
    });

    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const double n = n1 + n2;
    double rank_sum_a = 0.0;
    double tie_correction = 0.0;
    std::size_t i = 0;
    double rank = 1.0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j + 1 < all.size() && all[j + 1].value == all[i].value) ++j;
        const double tied = static_cast<double>(j - i + 1);
        const double midrank = rank + (tied - 1.0) / 2.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (all[k].group == 0) rank_sum_a += midrank;
        }
        if (tied > 1.0) tie_correction += tied * tied * tied - tied;
        rank += tied;
        i = j + 1;
    }

    const double mean = n1 * (n + 1.0) / 2.0;
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_correction / (n * (n - 1.0)));
    if (var <= 0.0) return 1.0;  // all values tied
    const double z = (rank_sum_a - mean) / std::sqrt(var);
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

}  // namespace ergm
