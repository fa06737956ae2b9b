#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ergm/flow/made.hpp"
#include "ergm/graph.hpp"

namespace ergm::flow {

// Per-coordinate affine maps for theta and the conditioning vector, fitted on
// round-0 training data and frozen thereafter.
struct Standardizer {
    std::vector<double> theta_mean, theta_sd;
    std::vector<double> x_mean, x_sd;

    static Standardizer identity(int p, int context_dim);
    // sd floors at 1 when the data are (numerically) constant.
    static Standardizer fit(std::span<const double> thetas, std::span<const double> xs,
                            int p, int context_dim);
    double log_theta_jacobian() const;  // sum log sd_theta
};

struct MafConfig {
    int num_transforms = 5;
    int hidden_units = 50;
    int hidden_layers = 2;
    double alpha_clamp = 7.0;  // alpha = clamp * tanh(raw / clamp)
};

// Stack of masked affine autoregressive transforms with a standard normal
// base. Between consecutive transforms the coordinate order is reversed.
struct MafModel {
    int p = 0;
    int context_dim = 0;
    MafConfig cfg;
    std::vector<std::vector<int>> perms;  // perms[t][i] = source index of coordinate i
    std::vector<MadeNet> nets;
    Standardizer standardizer;
    std::uint64_t init_seed = 0;
};

MafModel make_maf(int p, int context_dim, const MafConfig& cfg, std::uint64_t seed,
                  WeightInit init = WeightInit::identity);

struct TransformCache {
    std::vector<double> input;  // permuted u
    MadeTrace trace;
    std::vector<double> alpha, z;
};

struct ForwardCache {
    std::vector<double> u0;       // standardized theta
    std::vector<double> context;  // standardized x
    std::vector<TransformCache> tf;
    std::vector<double> z;        // base-space image
    double log_det = 0.0;         // flow transforms only (permutations add zero)
};

// Maps raw theta to base space. log_det covers the affine transforms; the
// standardizer correction enters in log_prob.
void maf_forward(const MafModel& model, std::span<const double> theta, std::span<const double> x,
                 ForwardCache& cache);

// log q(theta | x) over raw theta units.
double maf_log_prob(const MafModel& model, std::span<const double> theta,
                    std::span<const double> x);
double maf_log_prob_cached(const MafModel& model, ForwardCache& cache,
                           std::span<const double> theta, std::span<const double> x);

// Deterministic inverse of maf_forward: maps a base-space point z back to
// raw theta by the sequential autoregressive inverse (p passes per transform).
ThetaVector maf_inverse(const MafModel& model, std::span<const double> z,
                        std::span<const double> x);

// Draws `count` samples: z ~ N(0, I), theta = maf_inverse(z, x).
std::vector<ThetaVector> maf_sample(const MafModel& model, std::span<const double> x, int count,
                                    Rng& rng);

// Gradient buffer aligned with the model's parameter slots.
struct GradBuffer {
    std::vector<MadeGrad> nets;

    void zero();
    void axpy(double a, const GradBuffer& other);  // this += a * other
};

GradBuffer make_grad_buffer(const MafModel& model);

// Accumulates scale * d(-log q(theta|x))/d(parameters) into grad.
// Returns log q(theta|x). cache is scratch.
double maf_logprob_backward(const MafModel& model, std::span<const double> theta,
                            std::span<const double> x, double scale, GradBuffer& grad,
                            ForwardCache& cache);

// Same backward step starting from an already-computed forward cache.
void maf_backward_from_cache(const MafModel& model, const ForwardCache& cache, double scale,
                             GradBuffer& grad);

// Flat views over every trainable array, in a fixed traversal order shared
// with GradBuffer and the optimizer state.
struct ParamView {
    double* data;
    std::size_t size;
};
std::vector<ParamView> param_views(MafModel& model);
std::vector<ParamView> grad_views(GradBuffer& grad);
std::size_t param_count(const MafModel& model);

}  // namespace ergm::flow
