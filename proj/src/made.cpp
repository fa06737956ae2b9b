#include "ergm/flow/made.hpp"

#include <cmath>
#include <stdexcept>

namespace ergm::flow {

MadeMasks made_masks(int p, int context_dim, int hidden_units, int hidden_layers, Rng& rng) {
    if (p < 1) throw std::invalid_argument("made_masks: p must be >= 1");
    if (context_dim < 0) throw std::invalid_argument("made_masks: negative context dim");
    if (hidden_units < 1 || hidden_layers < 1) {
        throw std::invalid_argument("made_masks: need at least one hidden unit and layer");
    }

    MadeMasks mm;
    mm.p = p;
    mm.context_dim = context_dim;
    mm.hidden_degrees.resize(hidden_layers);
    for (auto& degrees : mm.hidden_degrees) {
        degrees.resize(hidden_units);
        for (int k = 0; k < hidden_units; ++k) {
            // Cover every degree in [0, p-1] before sampling the rest.
            degrees[k] = k < p ? k : static_cast<int>(rng.uniform_below(p));
        }
    }

    mm.masks.resize(hidden_layers);
    // First layer: autoregressive input j (degree j+1) connects to hidden k
    // iff deg(k) >= j+1; context columns are all ones.
    {
        auto& m = mm.masks[0];
        m.assign(static_cast<std::size_t>(hidden_units) * (p + context_dim), 0);
        for (int k = 0; k < hidden_units; ++k) {
            const int dk = mm.hidden_degrees[0][k];
            for (int j = 0; j < p; ++j) {
                m[static_cast<std::size_t>(k) * (p + context_dim) + j] = dk >= j + 1 ? 1 : 0;
            }
            for (int c = 0; c < context_dim; ++c) {
                m[static_cast<std::size_t>(k) * (p + context_dim) + p + c] = 1;
            }
        }
    }
    for (int l = 1; l < hidden_layers; ++l) {
        auto& m = mm.masks[l];
        m.assign(static_cast<std::size_t>(hidden_units) * hidden_units, 0);
        for (int k = 0; k < hidden_units; ++k) {
            for (int j = 0; j < hidden_units; ++j) {
                m[static_cast<std::size_t>(k) * hidden_units + j] =
                    mm.hidden_degrees[l][k] >= mm.hidden_degrees[l - 1][j] ? 1 : 0;
            }
        }
    }
    // Output coordinate i (1-based degree i) connects to hidden k iff
    // deg(k) < i, so it sees exactly the inputs with degree < i.
    mm.out_mask.assign(static_cast<std::size_t>(p) * hidden_units, 0);
    const auto& last = mm.hidden_degrees.back();
    for (int i = 0; i < p; ++i) {
        for (int k = 0; k < hidden_units; ++k) {
            mm.out_mask[static_cast<std::size_t>(i) * hidden_units + k] = last[k] < i + 1 ? 1 : 0;
        }
    }
    return mm;
}

namespace {

MaskedLayer make_layer(int out_dim, int in_dim, const std::vector<std::uint8_t>& mask,
                       bool zero_init, Rng& rng) {
    MaskedLayer layer;
    layer.out_dim = out_dim;
    layer.in_dim = in_dim;
    layer.mask = mask;
    layer.b.assign(static_cast<std::size_t>(out_dim), 0.0);
    layer.w.assign(static_cast<std::size_t>(out_dim) * in_dim, 0.0);
    if (!zero_init) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
        for (double& v : layer.w) v = scale * (2.0 * rng.uniform() - 1.0);
    }
    return layer;
}

}  // namespace

MadeNet make_made(const MadeMasks& masks, int hidden_units, WeightInit init, Rng& rng) {
    MadeNet net;
    net.p = masks.p;
    net.context_dim = masks.context_dim;
    const int in0 = masks.p + masks.context_dim;
    net.hidden.reserve(masks.masks.size());
    for (std::size_t l = 0; l < masks.masks.size(); ++l) {
        const int in_dim = l == 0 ? in0 : hidden_units;
        net.hidden.push_back(make_layer(hidden_units, in_dim, masks.masks[l], false, rng));
    }
    const bool zero_heads = init == WeightInit::identity;
    net.out_mu = make_layer(masks.p, hidden_units, masks.out_mask, zero_heads, rng);
    net.out_alpha = make_layer(masks.p, hidden_units, masks.out_mask, zero_heads, rng);
    return net;
}

void made_forward(const MadeNet& net, std::span<const double> u, std::span<const double> context,
                  MadeTrace& trace) {
    if (static_cast<int>(u.size()) != net.p ||
        static_cast<int>(context.size()) != net.context_dim) {
        throw std::invalid_argument("made_forward: input dimension mismatch");
    }
    trace.acts.resize(net.hidden.size() + 1);
    auto& input = trace.acts[0];
    input.resize(u.size() + context.size());
    std::copy(u.begin(), u.end(), input.begin());
    std::copy(context.begin(), context.end(), input.begin() + u.size());

    for (std::size_t l = 0; l < net.hidden.size(); ++l) {
        const MaskedLayer& layer = net.hidden[l];
        const auto& prev = trace.acts[l];
        auto& out = trace.acts[l + 1];
        out.resize(layer.out_dim);
        for (int r = 0; r < layer.out_dim; ++r) {
            double acc = layer.b[r];
            const double* wrow = layer.w.data() + static_cast<std::size_t>(r) * layer.in_dim;
            const std::uint8_t* mrow = layer.mask.data() + static_cast<std::size_t>(r) * layer.in_dim;
            for (int c = 0; c < layer.in_dim; ++c) {
                acc += (mrow[c] ? wrow[c] : 0.0) * prev[c];
            }
            out[r] = std::tanh(acc);
        }
    }

    const auto& last = trace.acts.back();
    auto head = [&](const MaskedLayer& layer, std::vector<double>& out) {
        out.resize(layer.out_dim);
        for (int r = 0; r < layer.out_dim; ++r) {
            double acc = layer.b[r];
            const double* wrow = layer.w.data() + static_cast<std::size_t>(r) * layer.in_dim;
            const std::uint8_t* mrow = layer.mask.data() + static_cast<std::size_t>(r) * layer.in_dim;
            for (int c = 0; c < layer.in_dim; ++c) {
                acc += (mrow[c] ? wrow[c] : 0.0) * last[c];
            }
            out[r] = acc;
        }
    };
    head(net.out_mu, trace.mu);
    head(net.out_alpha, trace.alpha_raw);
}

MadeGrad make_made_grad(const MadeNet& net) {
    MadeGrad g;
    g.hidden_w.resize(net.hidden.size());
    g.hidden_b.resize(net.hidden.size());
    for (std::size_t l = 0; l < net.hidden.size(); ++l) {
        g.hidden_w[l].assign(net.hidden[l].w.size(), 0.0);
        g.hidden_b[l].assign(net.hidden[l].b.size(), 0.0);
    }
    g.mu_w.assign(net.out_mu.w.size(), 0.0);
    g.mu_b.assign(net.out_mu.b.size(), 0.0);
    g.alpha_w.assign(net.out_alpha.w.size(), 0.0);
    g.alpha_b.assign(net.out_alpha.b.size(), 0.0);
    return g;
}

void made_backward(const MadeNet& net, const MadeTrace& trace, std::span<const double> g_mu,
                   std::span<const double> g_alpha_raw, MadeGrad& grad, std::span<double> g_u) {
    const auto& last = trace.acts.back();
    std::vector<double> g_act(last.size(), 0.0);

    auto head_backward = [&](const MaskedLayer& layer, std::span<const double> g_out,
                             std::vector<double>& gw, std::vector<double>& gb) {
        for (int r = 0; r < layer.out_dim; ++r) {
            const double g = g_out[r];
            if (g == 0.0) continue;
            gb[r] += g;
            const std::uint8_t* mrow = layer.mask.data() + static_cast<std::size_t>(r) * layer.in_dim;
            double* gwrow = gw.data() + static_cast<std::size_t>(r) * layer.in_dim;
            const double* wrow = layer.w.data() + static_cast<std::size_t>(r) * layer.in_dim;
            for (int c = 0; c < layer.in_dim; ++c) {
                if (!mrow[c]) continue;
                gwrow[c] += g * last[c];
                g_act[c] += g * wrow[c];
            }
        }
    };
    head_backward(net.out_mu, g_mu, grad.mu_w, grad.mu_b);
    head_backward(net.out_alpha, g_alpha_raw, grad.alpha_w, grad.alpha_b);

    // Walk hidden layers backwards through the tanh nonlinearity.
    std::vector<double> g_prev;
    for (std::size_t li = net.hidden.size(); li-- > 0;) {
        const MaskedLayer& layer = net.hidden[li];
        const auto& act = trace.acts[li + 1];
        const auto& prev_act = trace.acts[li];
        g_prev.assign(prev_act.size(), 0.0);
        for (int r = 0; r < layer.out_dim; ++r) {
            const double gpre = g_act[r] * (1.0 - act[r] * act[r]);
            if (gpre == 0.0) continue;
            grad.hidden_b[li][r] += gpre;
            const std::uint8_t* mrow = layer.mask.data() + static_cast<std::size_t>(r) * layer.in_dim;
            double* gwrow = grad.hidden_w[li].data() + static_cast<std::size_t>(r) * layer.in_dim;
            const double* wrow = layer.w.data() + static_cast<std::size_t>(r) * layer.in_dim;
            for (int c = 0; c < layer.in_dim; ++c) {
                if (!mrow[c]) continue;
                gwrow[c] += gpre * prev_act[c];
                g_prev[c] += gpre * wrow[c];
            }
        }
        g_act.swap(g_prev);
    }

    // g_act now holds the gradient w.r.t. the concatenated input; the context
    // block is data, not parameters, so only the first p entries propagate.
    for (int j = 0; j < net.p; ++j) g_u[j] += g_act[j];
}

}  // namespace ergm::flow
