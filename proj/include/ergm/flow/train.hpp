#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ergm/flow/maf.hpp"
#include "ergm/mvn.hpp"
#include "ergm/sim.hpp"

namespace ergm::flow {

struct AdamState {
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step = 0;
    std::vector<std::vector<double>> m, v;  // aligned with param_views order
};

AdamState make_adam(MafModel& model, double learning_rate);

// Standard Adam update with bias correction; updates model parameters in
// place. Throws on any shape mismatch between state, model, and gradients.
void adam_step(AdamState& state, MafModel& model, GradBuffer& grads);

// Mean negative log-likelihood over the rows and its exact parameter
// gradient (reverse-mode). Rows are processed in fixed-size blocks that are
// reduced in block order, so results do not depend on the worker count.
double nll_grad(const MafModel& model, const TrainingSet& data, std::span<const int> rows,
                GradBuffer& grad, int workers = 0);
double nll_grad_serial(const MafModel& model, const TrainingSet& data, std::span<const int> rows,
                       GradBuffer& grad);

// Mean NLL without gradients (validation scoring).
double mean_nll(const MafModel& model, const TrainingSet& data, std::span<const int> rows);

// Atomic (classifier-style) loss over per-row atom sets. atom_rows holds
// atoms_per_row row indices per row, the row's own theta first. The loss per
// row is -log softmax over the atoms of log q(theta_j | x_row) - log pi(theta_j).
double atomic_nll_grad(const MafModel& model, const TrainingSet& data,
                       std::span<const int> rows, std::span<const int> atom_rows,
                       int atoms_per_row, const PriorSpec& prior, GradBuffer& grad,
                       int workers = 0);
double atomic_mean_nll(const MafModel& model, const TrainingSet& data,
                       std::span<const int> rows, std::span<const int> atom_rows,
                       int atoms_per_row, const PriorSpec& prior);

struct FitConfig {
    int epochs = 200;
    int batch_size = 256;
    double learning_rate = 5e-4;
    double validation_fraction = 0.1;
    int early_stop_patience = 20;
    std::uint64_t seed = 0;
    int workers = 0;
    // Atomic loss is enabled by setting atoms_per_batch >= 2 and a prior.
    int atoms_per_batch = 0;
    const PriorSpec* prior = nullptr;
};

struct TrainHistory {
    std::vector<double> train_nll;  // per epoch
    std::vector<double> val_nll;    // per epoch (selection metric)
    int best_epoch = -1;            // -1 means the initial parameters were best
    double best_val_nll = 0.0;
};

// Minibatch Adam with validation-based early stopping; restores the
// parameters that achieved the best selection NLL (initial parameters
// included as the epoch -1 baseline). Throws NumericalError on NaN loss.
TrainHistory fit_maf(MafModel& model, const TrainingSet& data, const FitConfig& cfg);

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ergm::flow
