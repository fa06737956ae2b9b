#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ergm/rng.hpp"

namespace ergm::flow {

// Degree assignment for the masked feedforward network. Autoregressive
// inputs carry degrees 1..p; hidden units carry degrees in [0, p-1];
// context inputs act as degree 0 and are visible to every hidden unit.
// Output coordinate i may depend only on inputs with degree < i.
struct MadeMasks {
    int p = 0;
    int context_dim = 0;
    std::vector<std::vector<int>> hidden_degrees;  // one vector per hidden layer
    // masks[0]: hidden0 x (p + context_dim); masks[l]: hidden_l x hidden_{l-1}
    std::vector<std::vector<std::uint8_t>> masks;
    std::vector<std::uint8_t> out_mask;  // p x hidden_last (per output coordinate)
};

// Every degree value in [0, p-1] is assigned at least once per layer (given
// hidden_units >= p); the remainder is drawn uniformly from rng.
MadeMasks made_masks(int p, int context_dim, int hidden_units, int hidden_layers, Rng& rng);

struct MaskedLayer {
    int out_dim = 0;
    int in_dim = 0;
    std::vector<double> w;              // row-major out_dim x in_dim
    std::vector<std::uint8_t> mask;     // same shape; 0 entries pin w to zero
    std::vector<double> b;

    double wm(int r, int c) const {
        const std::size_t idx = static_cast<std::size_t>(r) * in_dim + c;
        return mask[idx] ? w[idx] : 0.0;
    }
};

// One masked feedforward conditioner producing (mu_i, alpha_i) per
// coordinate. Hidden activations are tanh; outputs are linear.
struct MadeNet {
    int p = 0;
    int context_dim = 0;
    std::vector<MaskedLayer> hidden;
    MaskedLayer out_mu;
    MaskedLayer out_alpha;
};

enum class WeightInit { identity, random };

// identity: hidden weights small uniform, output heads zero, so the affine
// transform starts as the identity map. random: all layers small uniform.
MadeNet make_made(const MadeMasks& masks, int hidden_units, WeightInit init, Rng& rng);

struct MadeTrace {
    std::vector<std::vector<double>> acts;  // acts[0] = input (u ++ context); then tanh outputs
    std::vector<double> mu, alpha_raw;
};

// Forward pass; u has size p, context has size context_dim.
void made_forward(const MadeNet& net, std::span<const double> u, std::span<const double> context,
                  MadeTrace& trace);

struct MadeGrad {
    std::vector<std::vector<double>> hidden_w, hidden_b;
    std::vector<double> mu_w, mu_b, alpha_w, alpha_b;
};

MadeGrad make_made_grad(const MadeNet& net);

// Backpropagates (g_mu, g_alpha_raw) through the trace; accumulates parameter
// gradients into grad and the input gradient into g_u (size p, added to).
void made_backward(const MadeNet& net, const MadeTrace& trace, std::span<const double> g_mu,
                   std::span<const double> g_alpha_raw, MadeGrad& grad, std::span<double> g_u);

}  // namespace ergm::flow
