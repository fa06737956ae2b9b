#include <doctest.h>

#include <cmath>
#include <map>

#include "ergm/enumerate.hpp"
#include "ergm/numeric.hpp"
#include "ergm/sim.hpp"

using namespace ergm;

TEST_CASE("log_unnorm_density is the inner product") {
    CHECK(log_unnorm_density({0.0, 0.0, 0.0}, {5.0, 2.5, 1.0}) == 0.0);
    CHECK(log_unnorm_density({1.0, 0.0, 0.0}, {3.0, 3.0, 0.0}) == 3.0);
    CHECK(log_unnorm_density({0.5, -1.0, 2.0}, {2.0, 1.0, 1.0}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(log_unnorm_density({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("mh_step accepts sure moves and rejects impossible ones") {
    StatsConfig edges_only;
    edges_only.stat_set = {Stat::edges};

    // theta = 0 makes every proposal ratio exp(0) = 1: always accepted.
    {
        Graph g(4);
        Rng rng(1);
        ChangeStatsScratch scratch;
        for (int t = 0; t < 200; ++t) {
            CHECK(mh_step_inplace(g, {0.0}, edges_only, rng, scratch));
        }
    }
    // A hugely negative edge parameter keeps the empty graph empty.
    {
        Graph g(4);
        Rng rng(2);
        ChangeStatsScratch scratch;
        for (int t = 0; t < 2000; ++t) mh_step_inplace(g, {-1e9}, edges_only, rng, scratch);
        CHECK(g.edge_count() == 0);
    }
    // Pure variant leaves the input untouched.
    {
        const Graph g(4);
        Rng rng(3);
        const Graph next = mh_step(g, {0.0}, edges_only, rng);
        CHECK(g.edge_count() == 0);
        CHECK(next.edge_count() == 1);
    }
}

TEST_CASE("simulate_network determinism and validation") {
    StatsConfig stats;
    SimConfig cfg;
    cfg.n = 6;
    cfg.iterations = 500;
    cfg.seed = 99;

    const Graph a = simulate_network({0.1, 0.05, -0.02}, stats, cfg);
    const Graph b = simulate_network({0.1, 0.05, -0.02}, stats, cfg);
    CHECK(a == b);

    SimConfig bad = cfg;
    bad.iterations = 0;
    CHECK_THROWS_AS(simulate_network({0.0, 0.0, 0.0}, stats, bad), std::invalid_argument);

    SimConfig one = cfg;
    one.iterations = 1;
    StatsConfig edges_only;
    edges_only.stat_set = {Stat::edges};
    one.n = 5;
    const Graph empty = simulate_network({-1e9}, edges_only, one);
    CHECK(empty.edge_count() == 0);
}

TEST_CASE("theta = 0 samples labelled graphs uniformly (n=4)") {
    StatsConfig edges_only;
    edges_only.stat_set = {Stat::edges};
    const ThetaVector theta = {0.0};

    Graph g(4);
    Rng rng(2024);
    ChangeStatsScratch scratch;
    std::map<std::uint64_t, int> counts;
    auto key = [](const Graph& graph) {
        std::uint64_t mask = 0;
        int bit = 0;
        for (int i = 0; i < 4; ++i) {
            for (int j = i + 1; j < 4; ++j, ++bit) {
                if (graph.has_edge(i, j)) mask |= std::uint64_t{1} << bit;
            }
        }
        return mask;
    };
    const int draws = 100000;
    for (int t = 0; t < draws; ++t) {
        mh_step_inplace(g, theta, edges_only, rng, scratch);
        counts[key(g)] += 1;
    }
    CHECK(counts.size() == 64);
    for (const auto& [mask, count] : counts) {
        CHECK(std::abs(count / static_cast<double>(draws) - 1.0 / 64.0) < 0.01);
    }
}

TEST_CASE("edges-only chain matches its Binomial stationary law") {
    // Independent-edge model: each pair present with p = e^theta / (1 + e^theta).
    StatsConfig edges_only;
    edges_only.stat_set = {Stat::edges};
    const double theta = std::log(2.0);

    Graph g(4);
    Rng rng(5);
    ChangeStatsScratch scratch;
    std::vector<double> freq(7, 0.0);
    const int burn = 5000;
    const int draws = 1000000;
    for (int t = 0; t < burn; ++t) mh_step_inplace(g, {theta}, edges_only, rng, scratch);
    for (int t = 0; t < draws; ++t) {
        mh_step_inplace(g, {theta}, edges_only, rng, scratch);
        freq[static_cast<std::size_t>(g.edge_count())] += 1.0;
    }
    for (double& f : freq) f /= draws;

    const double p = 2.0 / 3.0;
    double tv = 0.0;
    for (int k = 0; k <= 6; ++k) {
        double binom = 1.0;
        for (int i = 0; i < k; ++i) binom *= static_cast<double>(6 - i) / (i + 1);
        const double prob = binom * std::pow(p, k) * std::pow(1.0 - p, 6 - k);
        tv += std::abs(freq[static_cast<std::size_t>(k)] - prob);
    }
    CHECK(tv / 2.0 < 0.01);
}

TEST_CASE("simulate_stats_batch seeding and determinism") {
    StatsConfig stats;
    SimConfig cfg;
    cfg.n = 8;
    cfg.iterations = 300;
    cfg.seed = 42;

    const std::vector<ThetaVector> empty;
    CHECK(simulate_stats_batch(empty, stats, cfg).size() == 0);

    std::vector<ThetaVector> thetas;
    for (int b = 0; b < 16; ++b) thetas.push_back({-0.5 + 0.05 * b, 0.1, -0.1});

    const TrainingSet batch = simulate_stats_batch(thetas, stats, cfg);
    REQUIRE(batch.size() == 16);

    // The batch equals the concatenation of single-theta calls with the
    // per-item seed rule.
    for (std::size_t b = 0; b < thetas.size(); ++b) {
        SimConfig item = cfg;
        item.seed = item_seed(cfg.seed, b);
        const StatsVector x = summary_stats(simulate_network(thetas[b], stats, item), stats);
        const auto row = batch.x_row(b);
        for (std::size_t k = 0; k < x.size(); ++k) CHECK(row[k] == x[k]);
    }

    // Serial reference path is bit-identical to the parallel kernel.
    const TrainingSet serial = simulate_stats_batch_serial(thetas, stats, cfg);
    CHECK(serial.xs == batch.xs);
    CHECK(serial.thetas == batch.thetas);
    CHECK(serial.rounds == batch.rounds);
}

TEST_CASE("batch of uniform-graph draws has the right mean edge count") {
    StatsConfig stats;
    SimConfig cfg;
    cfg.n = 4;
    cfg.iterations = 200;
    cfg.seed = 17;
    const std::vector<ThetaVector> thetas(2000, ThetaVector{0.0, 0.0, 0.0});
    const TrainingSet batch = simulate_stats_batch(thetas, stats, cfg);

    double mean_edges = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) mean_edges += batch.x_row(b)[0];
    mean_edges /= static_cast<double>(batch.size());
    // Uniform over graphs: mean edges = pairs / 2 = 3; se = sqrt(6*0.25/2000).
    const double se = std::sqrt(6.0 * 0.25 / 2000.0);
    CHECK(std::abs(mean_edges - 3.0) < 3.0 * se);
}

TEST_CASE("full initialisation with a huge edge parameter stays complete") {
    StatsConfig edges_only;
    edges_only.stat_set = {Stat::edges};
    SimConfig cfg;
    cfg.n = 5;
    cfg.iterations = 500;
    cfg.init = InitKind::full;
    cfg.seed = 8;
    const Graph g = simulate_network({1e9}, edges_only, cfg);
    CHECK(g.edge_count() == 10);
}

TEST_CASE("stats trace records every thin-th step") {
    StatsConfig stats;
    SimConfig cfg;
    cfg.n = 5;
    cfg.iterations = 100;
    cfg.thin = 10;
    cfg.seed = 1;
    const auto trace = simulate_stats_trace({0.0, 0.0, 0.0}, stats, cfg);
    CHECK(trace.size() == 10);
}
