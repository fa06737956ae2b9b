#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "ergm/exchange.hpp"
#include "ergm/flow/maf.hpp"
#include "ergm/mvn.hpp"
#include "ergm/npe.hpp"
#include "ergm/sim.hpp"

namespace ergm {

struct StratumBounds {
    double lo = 0.0;
    double hi = 0.0;
};

// Edge-count strata [0,275), [275,550), [550,825), [825,1100) defined for
// 90-vertex networks, rescaled by the pair-count ratio for other sizes.
std::array<StratumBounds, 4> edge_strata(int n);

struct EvalCase {
    ThetaVector theta_true;
    int stratum = 0;  // index into edge_strata
    int case_id = 0;
};

struct SearchBox {
    std::vector<std::pair<double, double>> bounds;  // per coordinate [lo, hi]
};

struct TruthSamplerConfig {
    std::array<int, 4> target_counts{};
    SearchBox box;
    int pilot_sims = 20;
    int attempt_budget = 20000;
    std::uint64_t seed = 0;
};

// Rejection-samples theta uniformly from the box, keeping draws whose pilot
// mean edge count lands in the stratum. Throws std::runtime_error when a
// stratum's attempt budget is exhausted.
std::vector<EvalCase> stratified_truths(const TruthSamplerConfig& cfg, const StatsConfig& stats,
                                        const SimConfig& sim);

ThetaVector point_estimate(std::span<const ThetaVector> posterior);

struct BiasReport {
    std::vector<double> me, mae, rmse;          // per coordinate
    std::vector<ThetaVector> case_estimates;    // theta-hat per case
};

// ME = mean(theta_true - theta_hat); MAE/RMSE accordingly, per coordinate.
BiasReport bias_metrics(const std::vector<ThetaVector>& truths,
                        const std::vector<ThetaVector>& estimates);

// Linear interpolation between closest order statistics, inclusive.
double quantile(std::vector<double> values, double q);

struct MagnitudeEntry {
    std::vector<std::uint8_t> small_bias;  // per statistic
    std::vector<double> coverage_pct;      // share of x_pred inside the 5-95 band
};

// Small bias iff mean(x_pred) lies within [Q05, Q95] of x_true, per statistic.
MagnitudeEntry magnitude_classify(const std::vector<StatsVector>& x_true_samples,
                                  const std::vector<StatsVector>& x_pred_samples);

struct MagnitudeReport {
    std::vector<MagnitudeEntry> cases;
};

struct BiasEvalSettings {
    int replicates = 50;         // M observations per case
    int posterior_draws = 10000; // flow draws per observation
    int pred_per_replicate = 100;
    int true_draws = 5000;
    int workers = 0;
    std::uint64_t seed = 0;
};

// The paper-style K x M protocol: per case, M simulated observations, an
// amortised posterior mean each, their average as the point estimate, and a
// posterior-predictive comparison in statistic space.
std::pair<BiasReport, MagnitudeReport> run_bias_eval(const std::vector<EvalCase>& cases,
                                                     const flow::MafModel& model,
                                                     const StatsConfig& stats,
                                                     const SimConfig& sim,
                                                     const BiasEvalSettings& settings);

struct ComparePairs {
    std::vector<ThetaVector> npe_means;       // one per replicate
    std::vector<ThetaVector> exchange_means;  // paired
};

struct CompareSettings {
    int replicates = 20;
    int posterior_draws = 10000;
    int workers = 0;
    std::uint64_t seed = 0;
};

ComparePairs compare_methods(const EvalCase& eval_case, const flow::MafModel& model,
                             const PriorSpec& prior, const ProposalSpec& prop,
                             const ExchangeConfig& exchange_cfg, const StatsConfig& stats,
                             const SimConfig& sim, const CompareSettings& settings);

// Generic paired comparison over per-replicate estimators; used to sanity
// check the harness with the exchange sampler on both sides.
using PointEstimator = std::function<ThetaVector(const StatsVector& x_obs, std::uint64_t seed)>;
ComparePairs compare_estimators(const EvalCase& eval_case, const StatsConfig& stats,
                                const SimConfig& sim, int replicates, std::uint64_t seed,
                                int workers, const PointEstimator& method_a,
                                const PointEstimator& method_b);

// Two-sided normal-approximation p-value of the Wilcoxon rank-sum test
// (midranks for ties, tie-corrected variance).
double wilcoxon_rank_sum_p(std::span<const double> a, std::span<const double> b);

}  // namespace ergm
