#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ergm/flow/maf.hpp"
#include "ergm/flow/train.hpp"
#include "ergm/mvn.hpp"
#include "ergm/sim.hpp"

namespace ergm {

struct NpeConfig {
    int B = 50000;
    int epochs = 200;
    int batch_size = 256;
    double learning_rate = 5e-4;
    int early_stop_patience = 20;
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;
    int workers = 0;
    flow::MafConfig flow;

    void validate() const;
};

struct SnpeConfig {
    NpeConfig base;
    int rounds = 1;           // T
    int per_round_B = 1000;
    int atoms_per_batch = 10; // M
    StatsVector x_obs;

    void validate() const;
};

// theta_b from the prior, x_b from one network realisation each; round 0.
TrainingSet simulate_prior_round(const PriorSpec& prior, int B, const StatsConfig& stats,
                                 const SimConfig& sim, int workers = 0);

struct TrainedNpe {
    flow::MafModel model;
    flow::TrainHistory history;
};

// Fits the flow on prior-round pairs by minibatch Adam on the mean NLL.
// Requires every pair to carry round 0. The standardizer is fitted on the
// training data before optimisation and frozen.
TrainedNpe train_npe(const TrainingSet& data, const StatsConfig& stats, const NpeConfig& cfg);

// log of q(theta|x)/pi(theta) normalised over the atom set, via log-sum-exp.
// theta must be one of the atoms (coordinate-exact match).
double atomic_log_prob(const flow::MafModel& model, const ThetaVector& theta,
                       const StatsVector& x, const std::vector<ThetaVector>& atoms,
                       const PriorSpec& prior);
// Pure kernel over precomputed scores s_j = log q_j - log pi_j.
double atomic_log_prob_from_scores(std::span<const double> scores, std::size_t index);

struct SnpeRoundDiag {
    int round = 0;                 // 1-based
    std::size_t cumulative_pairs = 0;
    flow::TrainHistory history;
    ThetaVector posterior_mean;    // at x_obs, from diagnostic draws
    ThetaVector posterior_sd;
    double leakage_fraction = 0.0; // rejection rate against the prior support box
};

struct SnpeResult {
    flow::MafModel model;
    std::vector<SnpeRoundDiag> rounds;
    TrainingSet data;  // cumulative pairs with provenance
};

// Observer invoked after each completed round (diagnostics plus the current
// model); it must not mutate shared state the training depends on.
using SnpeRoundObserver = std::function<void(const SnpeRoundDiag&, const flow::MafModel&)>;

// Round 1 trains on prior-round data with the plain NLL (identical to
// train_npe under the same seed); later rounds draw proposals from
// q(.|x_obs), append simulations, and train with the atomic loss over the
// cumulative set.
SnpeResult train_snpe(const SnpeConfig& cfg, const PriorSpec& prior, const StatsConfig& stats,
                      const SimConfig& sim, const SnpeRoundObserver& on_round = nullptr);

struct PosteriorSamples {
    std::vector<ThetaVector> samples;
    double rejection_fraction = 0.0;
};

struct LeakageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flow samples at x_obs. With truncate set, draws are rejected against the
// box prior_mean +- 6 prior sd per coordinate; the rejection fraction is the
// leakage diagnostic. A rejection rate above 99% raises LeakageError.
PosteriorSamples posterior_sample(const flow::MafModel& model, const StatsVector& x_obs,
                                  int count, const PriorSpec& prior, bool truncate,
                                  std::uint64_t seed);

}  // namespace ergm
