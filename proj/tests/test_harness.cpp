#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ergm/harness.hpp"
#include "ergm/numeric.hpp"
#include "oracles.hpp"

using namespace ergm;

TEST_CASE("edge strata scale with the pair count") {
    const auto reference = edge_strata(90);
    CHECK(reference[0].lo == 0.0);
    CHECK(reference[0].hi == doctest::Approx(275.0));
    CHECK(reference[3].hi == doctest::Approx(1100.0));

    const auto scaled = edge_strata(16);
    const double scale = (16.0 * 15.0 / 2.0) / (90.0 * 89.0 / 2.0);
    CHECK(scaled[1].lo == doctest::Approx(275.0 * scale));
    CHECK(scaled[1].hi == doctest::Approx(550.0 * scale));
}

TEST_CASE("point_estimate") {
    const ThetaVector only = {0.4, -1.0};
    CHECK(point_estimate(std::vector<ThetaVector>{only}) == only);

    const std::vector<ThetaVector> two = {{0.0, 0.0}, {2.0, 2.0}};
    CHECK(point_estimate(two) == ThetaVector{1.0, 1.0});

    std::vector<ThetaVector> shuffled = {{1.0, 5.0}, {2.0, 4.0}, {3.0, 3.0}};
    const ThetaVector forward = point_estimate(shuffled);
    std::reverse(shuffled.begin(), shuffled.end());
    const ThetaVector backward = point_estimate(shuffled);
    for (std::size_t k = 0; k < forward.size(); ++k) {
        CHECK(forward[k] == doctest::Approx(backward[k]).epsilon(1e-15));
    }

    CHECK_THROWS_AS(point_estimate(std::vector<ThetaVector>{}), std::invalid_argument);
}

TEST_CASE("bias_metrics on the spec toy cases") {
    {
        const std::vector<ThetaVector> truths = {{1.0}, {2.0}};
        const BiasReport r = bias_metrics(truths, truths);
        CHECK(r.me[0] == 0.0);
        CHECK(r.mae[0] == 0.0);
        CHECK(r.rmse[0] == 0.0);
    }
    {
        // Symmetric errors cancel in ME but not MAE/RMSE.
        const std::vector<ThetaVector> truths = {{0.0}, {0.0}};
        const std::vector<ThetaVector> estimates = {{1.0}, {-1.0}};
        const BiasReport r = bias_metrics(truths, estimates);
        CHECK(r.me[0] == doctest::Approx(0.0));
        CHECK(r.mae[0] == doctest::Approx(1.0));
        CHECK(r.rmse[0] == doctest::Approx(1.0));
    }
    {
        const std::vector<ThetaVector> truths = {{0.0}, {0.0}};
        const std::vector<ThetaVector> estimates = {{1.0}, {3.0}};
        const BiasReport r = bias_metrics(truths, estimates);
        CHECK(r.me[0] == doctest::Approx(-2.0));
        CHECK(r.mae[0] == doctest::Approx(2.0));
        CHECK(r.rmse[0] == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(bias_metrics({{1.0}}, {{1.0}, {2.0}}), std::invalid_argument);
}

TEST_CASE("metric inequalities |ME| <= MAE <= RMSE hold on random reports") {
    Rng rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        const int K = 1 + static_cast<int>(rng.uniform_below(20));
        std::vector<ThetaVector> truths, estimates;
        for (int k = 0; k < K; ++k) {
            truths.push_back({rng.normal(), rng.normal(), rng.normal()});
            estimates.push_back({rng.normal(), rng.normal(), rng.normal()});
        }
        const BiasReport r = bias_metrics(truths, estimates);
        for (int c = 0; c < 3; ++c) {
            CHECK(std::abs(r.me[c]) <= r.mae[c] + 1e-12);
            CHECK(r.mae[c] <= r.rmse[c] + 1e-12);
        }
    }
}

TEST_CASE("quantile interpolates between order statistics") {
    const std::vector<double> v = {10.0, 20.0, 30.0, 40.0, 50.0};
    CHECK(quantile(v, 0.0) == 10.0);
    CHECK(quantile(v, 1.0) == 50.0);
    CHECK(quantile(v, 0.5) == 30.0);
    CHECK(quantile(v, 0.25) == doctest::Approx(20.0));
    CHECK(quantile(v, 0.05) == doctest::Approx(10.0 + 0.2 * 10.0));
    CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(quantile(v, 1.5), std::invalid_argument);
}

TEST_CASE("magnitude_classify on constructed sample sets") {
    Rng rng(17);
    std::vector<StatsVector> base;
    for (int r = 0; r < 5000; ++r) base.push_back({rng.normal(), 10.0 + 2.0 * rng.normal()});

    // Same sample set: small bias and roughly 90% coverage by construction.
    {
        const MagnitudeEntry entry = magnitude_classify(base, base);
        CHECK(entry.small_bias == std::vector<std::uint8_t>{1, 1});
        CHECK(entry.coverage_pct[0] == doctest::Approx(90.0).epsilon(0.01));
        CHECK(entry.coverage_pct[1] == doctest::Approx(90.0).epsilon(0.01));
    }
    // Far-shifted predictions: large bias, zero coverage.
    {
        std::vector<StatsVector> shifted = base;
        for (auto& row : shifted) {
            row[0] += 100.0;
            row[1] += 100.0;
        }
        const MagnitudeEntry entry = magnitude_classify(base, shifted);
        CHECK(entry.small_bias == std::vector<std::uint8_t>{0, 0});
        CHECK(entry.coverage_pct[0] == 0.0);
        CHECK(entry.coverage_pct[1] == 0.0);
    }
    // Degenerate constant sets: the closed band still contains the value.
    {
        const std::vector<StatsVector> constant(100, StatsVector{7.0});
        const MagnitudeEntry entry = magnitude_classify(constant, constant);
        CHECK(entry.small_bias == std::vector<std::uint8_t>{1});
        CHECK(entry.coverage_pct[0] == 100.0);
    }
    CHECK_THROWS_AS(magnitude_classify({}, base), std::invalid_argument);
    CHECK_THROWS_AS(magnitude_classify(base, {}), std::invalid_argument);
}

TEST_CASE("magnitude_classify self-consistency at sample size 10^4") {
    // Independent draws from the same distribution classify as small bias
    // nearly always once the mean's standard error is far below the band.
    int small_count = 0;
    const int seeds = 20;
    for (int seed = 0; seed < seeds; ++seed) {
        Rng rng(9000 + seed);
        std::vector<StatsVector> x_true, x_pred;
        for (int r = 0; r < 10000; ++r) x_true.push_back({rng.normal()});
        for (int r = 0; r < 10000; ++r) x_pred.push_back({rng.normal()});
        const MagnitudeEntry entry = magnitude_classify(x_true, x_pred);
        small_count += entry.small_bias[0];
    }
    CHECK(small_count == seeds);
}

TEST_CASE("stratified_truths: empty targets, determinism, self-check") {
    StatsConfig stats;
    SimConfig sim;
    sim.n = 16;
    sim.iterations = 2500;
    sim.seed = 3;

    TruthSamplerConfig cfg;
    cfg.target_counts = {0, 0, 0, 0};
    cfg.box.bounds = {{-3.5, 0.0}, {-0.5, 0.5}, {-0.5, 0.5}};
    cfg.pilot_sims = 20;
    cfg.attempt_budget = 1000;
    cfg.seed = 12;
    CHECK(stratified_truths(cfg, stats, sim).empty());

    cfg.target_counts = {1, 1, 1, 1};
    const auto cases = stratified_truths(cfg, stats, sim);
    REQUIRE(cases.size() == 4);
    const auto again = stratified_truths(cfg, stats, sim);
    for (std::size_t c = 0; c < cases.size(); ++c) {
        CHECK(cases[c].theta_true == again[c].theta_true);
        CHECK(cases[c].stratum == static_cast<int>(c));
        CHECK(cases[c].case_id == static_cast<int>(c));
    }

    // Self-check: fresh pilot means re-simulate into the assigned stratum
    // for most cases (borderline cases may flip under Monte Carlo noise).
    const auto strata = edge_strata(sim.n);
    int in_stratum = 0;
    for (const EvalCase& c : cases) {
        double mean_edges = 0.0;
        const int fresh = 20;
        for (int r = 0; r < fresh; ++r) {
            SimConfig pilot = sim;
            pilot.seed = mix_seed(777, static_cast<std::uint64_t>(c.case_id), r);
            mean_edges += static_cast<double>(
                simulate_network(c.theta_true, stats, pilot).edge_count());
        }
        mean_edges /= fresh;
        if (mean_edges >= strata[c.stratum].lo && mean_edges < strata[c.stratum].hi) ++in_stratum;
    }
    CHECK(in_stratum >= 3);  // >= 80% of 4 cases, rounded

    // Unreachable stratum exhausts its attempt budget.
    TruthSamplerConfig impossible = cfg;
    impossible.target_counts = {0, 0, 0, 1};
    impossible.box.bounds = {{-30.0, -20.0}, {0.0, 0.0}, {0.0, 0.0}};  // graphs stay empty
    impossible.attempt_budget = 10;
    CHECK_THROWS_AS(stratified_truths(impossible, stats, sim), std::runtime_error);
}

TEST_CASE("wilcoxon rank-sum p-values") {
    // Hand-checked small case: a = {1,2}, b = {3,4} gives z ~ -1.549.
    const std::vector<double> a = {1.0, 2.0};
    const std::vector<double> b = {3.0, 4.0};
    CHECK(wilcoxon_rank_sum_p(a, b) == doctest::Approx(0.1213).epsilon(0.01));

    // Identical distributions: p should rarely be tiny.
    Rng rng(5);
    int tiny = 0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> s1, s2;
        for (int r = 0; r < 200; ++r) s1.push_back(rng.normal());
        for (int r = 0; r < 200; ++r) s2.push_back(rng.normal());
        if (wilcoxon_rank_sum_p(s1, s2) < 0.001) ++tiny;
    }
    CHECK(tiny <= 1);

    // A clear shift is detected.
    std::vector<double> s1, s2;
    for (int r = 0; r < 200; ++r) s1.push_back(rng.normal());
    for (int r = 0; r < 200; ++r) s2.push_back(rng.normal() + 2.0);
    CHECK(wilcoxon_rank_sum_p(s1, s2) < 1e-10);
}

TEST_CASE("run_bias_eval: shapes, ordering invariance, and the identity surrogate") {
    StatsConfig stats;
    SimConfig sim;
    sim.n = 8;
    sim.iterations = 400;
    sim.seed = 9;

    // Identity flow: posterior means are ~0 regardless of the observation.
    flow::MafConfig mcfg;
    mcfg.num_transforms = 1;
    mcfg.hidden_units = 4;
    mcfg.hidden_layers = 1;
    const flow::MafModel model = flow::make_maf(3, 3, mcfg, 1, flow::WeightInit::identity);

    std::vector<EvalCase> cases;
    cases.push_back({{-1.0, 0.2, 0.1}, 0, 0});
    cases.push_back({{-0.5, 0.1, -0.1}, 1, 1});

    BiasEvalSettings settings;
    settings.replicates = 4;
    settings.posterior_draws = 2000;
    settings.pred_per_replicate = 10;
    settings.true_draws = 200;
    settings.seed = 5;

    const auto [bias, magnitude] = run_bias_eval(cases, model, stats, sim, settings);
    REQUIRE(bias.case_estimates.size() == 2);
    REQUIRE(magnitude.cases.size() == 2);
    for (int c = 0; c < 3; ++c) {
        CHECK(std::abs(bias.me[c]) <= bias.mae[c] + 1e-12);
        CHECK(bias.mae[c] <= bias.rmse[c] + 1e-12);
    }
    // Identity-flow estimates sit near zero: the point estimates are tiny.
    for (const ThetaVector& est : bias.case_estimates) {
        for (double v : est) CHECK(std::abs(v) < 0.1);
    }

    // Case order does not change per-case results.
    std::vector<EvalCase> reversed = {cases[1], cases[0]};
    const auto [bias2, magnitude2] = run_bias_eval(reversed, model, stats, sim, settings);
    for (int k = 0; k < 3; ++k) {
        CHECK(bias2.case_estimates[0][k] == bias.case_estimates[1][k]);
        CHECK(bias2.case_estimates[1][k] == bias.case_estimates[0][k]);
        CHECK(bias2.me[k] == doctest::Approx(bias.me[k]).epsilon(1e-12));
    }
    CHECK(magnitude2.cases[0].coverage_pct == magnitude.cases[1].coverage_pct);

    CHECK_THROWS_AS(run_bias_eval({}, model, stats, sim, settings), std::invalid_argument);
}

TEST_CASE("compare_estimators pairs the same observations across methods") {
    StatsConfig stats;
    SimConfig sim;
    sim.n = 8;
    sim.iterations = 300;
    sim.seed = 33;
    EvalCase eval_case{{-1.0, 0.1, 0.1}, 0, 0};

    std::vector<StatsVector> seen_a, seen_b;
    const PointEstimator echo_a = [&](const StatsVector& x, std::uint64_t) {
        return ThetaVector{x[0], x[1], x[2]};
    };
    const PointEstimator echo_b = echo_a;
    const ComparePairs pairs = compare_estimators(eval_case, stats, sim, 12, 71, 1, echo_a, echo_b);
    REQUIRE(pairs.npe_means.size() == 12);
    REQUIRE(pairs.exchange_means.size() == 12);
    // Identical estimators on the same x_m give identical paired rows.
    for (int m = 0; m < 12; ++m) CHECK(pairs.npe_means[m] == pairs.exchange_means[m]);
}

namespace {

// A well-trained amortised fit on the enumerable n=4 edges-only model; used
// as the near-exact posterior surrogate for the protocol-level checks.
flow::MafModel trained_surrogate(const StatsConfig& stats, const PriorSpec& prior,
                                 const SimConfig& sim) {
    const TrainingSet data = simulate_prior_round(prior, 20000, stats, sim);
    NpeConfig cfg;
    cfg.B = 20000;
    cfg.batch_size = 256;
    cfg.epochs = 40;
    cfg.learning_rate = 1e-3;
    cfg.validation_fraction = 0.1;
    cfg.early_stop_patience = 8;
    cfg.seed = 5150;
    cfg.flow.num_transforms = 3;
    cfg.flow.hidden_units = 24;
    cfg.flow.hidden_layers = 1;
    return train_npe(data, stats, cfg).model;
}

}  // namespace

TEST_CASE("bias protocol: near-exact surrogate gives ME near zero on prior-drawn truths") {
    StatsConfig stats;
    stats.stat_set = {Stat::edges};
    const PriorSpec prior = PriorSpec::normal({0.0}, {1.0});
    SimConfig sim;
    sim.n = 4;
    sim.iterations = 300;
    sim.seed = 71;
    const flow::MafModel model = trained_surrogate(stats, prior, sim);

    // Truths drawn from the prior make the posterior mean unbiased in
    // aggregate, so ME sits at zero up to Monte Carlo error.
    Rng rng(72);
    const int K = 16;
    std::vector<EvalCase> cases;
    for (int k = 0; k < K; ++k) cases.push_back({sample_prior(prior, rng), 0, k});

    BiasEvalSettings settings;
    settings.replicates = 8;
    settings.posterior_draws = 4000;
    settings.pred_per_replicate = 5;
    settings.true_draws = 200;
    settings.seed = 73;
    const auto [bias, magnitude] = run_bias_eval(cases, model, stats, sim, settings);

    // Monte Carlo error bound from the per-case residuals themselves.
    std::vector<double> residuals;
    for (int k = 0; k < K; ++k) {
        residuals.push_back(cases[k].theta_true[0] - bias.case_estimates[k][0]);
    }
    const double se = sd_of(residuals) / std::sqrt(static_cast<double>(K));
    CHECK(std::abs(bias.me[0]) <= 3.0 * se + 0.02);
    CHECK(std::abs(bias.me[0]) <= bias.mae[0] + 1e-12);
    CHECK(magnitude.cases.size() == static_cast<std::size_t>(K));
}

TEST_CASE("compare_methods: NPE and exchange agree on the enumerable model") {
    StatsConfig stats;
    stats.stat_set = {Stat::edges};
    const PriorSpec prior = PriorSpec::normal({0.0}, {1.0});
    SimConfig sim;
    sim.n = 4;
    sim.iterations = 300;
    sim.seed = 81;
    const flow::MafModel model = trained_surrogate(stats, prior, sim);

    EvalCase eval_case{{0.3}, 0, 0};
    const ProposalSpec prop = ProposalSpec::isotropic(1, 0.5);
    ExchangeConfig exch;
    exch.chain_length = 4000;
    exch.burn_in = 500;

    CompareSettings settings;
    settings.replicates = 6;
    settings.posterior_draws = 4000;
    settings.workers = 1;
    settings.seed = 82;
    const ComparePairs pairs =
        compare_methods(eval_case, model, prior, prop, exch, stats, sim, settings);
    double mad = 0.0;
    for (int m = 0; m < 6; ++m) {
        mad += std::abs(pairs.npe_means[m][0] - pairs.exchange_means[m][0]) / 6.0;
    }
    CHECK(mad < 0.2);
}

TEST_CASE("compare_methods self-comparison sanity (exchange on both sides)") {
    StatsConfig edges_only;
    edges_only.stat_set = {Stat::edges};
    SimConfig sim;
    sim.n = 4;
    sim.iterations = 80;
    sim.seed = 40;
    EvalCase eval_case{{0.2}, 0, 0};
    const PriorSpec prior = PriorSpec::normal({0.0}, {10.0});
    const ProposalSpec prop = ProposalSpec::isotropic(1, 0.5);

    ExchangeConfig exch;
    exch.chain_length = 500;
    exch.burn_in = 100;

    // Two independent exchange fits per replicate, distinguished by seed.
    const PointEstimator method_a = [&](const StatsVector& x, std::uint64_t seed) {
        ExchangeConfig cfg = exch;
        cfg.seed = seed;
        return run_exchange(x, prior, prop, edges_only, sim, cfg).posterior_mean();
    };
    const PointEstimator method_b = [&](const StatsVector& x, std::uint64_t seed) {
        ExchangeConfig cfg = exch;
        cfg.seed = mix_seed(seed, 0xabcdULL);
        return run_exchange(x, prior, prop, edges_only, sim, cfg).posterior_mean();
    };
    const int M = 40;
    const ComparePairs pairs = compare_estimators(eval_case, edges_only, sim, M, 90, 1,
                                                  method_a, method_b);
    std::vector<double> a, b;
    for (int m = 0; m < M; ++m) {
        a.push_back(pairs.npe_means[m][0]);
        b.push_back(pairs.exchange_means[m][0]);
    }
    CHECK(testing::ks_statistic(a, b) < 0.35);
}
