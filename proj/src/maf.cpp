#include "ergm/flow/maf.hpp"

#include <cmath>
#include <stdexcept>

namespace ergm::flow {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr std::uint64_t kMaskSeedTag = 0x6d61736bULL;   // masks
constexpr std::uint64_t kWeightSeedTag = 0x77656974ULL; // weights
}  // namespace

Standardizer Standardizer::identity(int p, int context_dim) {
    Standardizer s;
    s.theta_mean.assign(p, 0.0);
    s.theta_sd.assign(p, 1.0);
    s.x_mean.assign(context_dim, 0.0);
    s.x_sd.assign(context_dim, 1.0);
    return s;
}

Standardizer Standardizer::fit(std::span<const double> thetas, std::span<const double> xs,
                               int p, int context_dim) {
    if (p < 1 || thetas.size() % p != 0) {
        throw std::invalid_argument("Standardizer: bad theta layout");
    }
    if (context_dim < 1 || xs.size() % context_dim != 0) {
        throw std::invalid_argument("Standardizer: bad x layout");
    }
    const std::size_t rows = thetas.size() / p;
    if (rows == 0 || xs.size() / context_dim != rows) {
        throw std::invalid_argument("Standardizer: row count mismatch");
    }
    auto fit_cols = [rows](std::span<const double> data, int dim, std::vector<double>& mean,
                           std::vector<double>& sd) {
        mean.assign(dim, 0.0);
        sd.assign(dim, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            for (int k = 0; k < dim; ++k) mean[k] += data[r * dim + k];
        }
        for (int k = 0; k < dim; ++k) mean[k] /= static_cast<double>(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            for (int k = 0; k < dim; ++k) {
                const double d = data[r * dim + k] - mean[k];
                sd[k] += d * d;
            }
        }
        for (int k = 0; k < dim; ++k) {
            sd[k] = rows > 1 ? std::sqrt(sd[k] / static_cast<double>(rows - 1)) : 0.0;
            if (sd[k] < 1e-12) sd[k] = 1.0;
        }
    };
    Standardizer s;
    fit_cols(thetas, p, s.theta_mean, s.theta_sd);
    fit_cols(xs, context_dim, s.x_mean, s.x_sd);
    return s;
}

double Standardizer::log_theta_jacobian() const {
    double acc = 0.0;
    for (double sd : theta_sd) acc += std::log(sd);
    return acc;
}

MafModel make_maf(int p, int context_dim, const MafConfig& cfg, std::uint64_t seed,
                  WeightInit init) {
    if (p < 1 || context_dim < 1) {
        throw std::invalid_argument("make_maf: p and context_dim must be >= 1");
    }
    if (cfg.num_transforms < 1) {
        throw std::invalid_argument("make_maf: need at least one transform");
    }
    MafModel model;
    model.p = p;
    model.context_dim = context_dim;
    model.cfg = cfg;
    model.standardizer = Standardizer::identity(p, context_dim);
    model.init_seed = seed;

    model.perms.resize(cfg.num_transforms);
    for (int t = 0; t < cfg.num_transforms; ++t) {
        model.perms[t].resize(p);
        for (int i = 0; i < p; ++i) {
            model.perms[t][i] = t == 0 ? i : p - 1 - i;  // reverse between transforms
        }
    }

    model.nets.reserve(cfg.num_transforms);
    for (int t = 0; t < cfg.num_transforms; ++t) {
        Rng mask_rng(mix_seed(seed, kMaskSeedTag, static_cast<std::uint64_t>(t)));
        Rng weight_rng(mix_seed(seed, kWeightSeedTag, static_cast<std::uint64_t>(t)));
        const MadeMasks masks = made_masks(p, context_dim, cfg.hidden_units, cfg.hidden_layers,
                                           mask_rng);
        model.nets.push_back(make_made(masks, cfg.hidden_units, init, weight_rng));
    }
    return model;
}

namespace {

inline double clamp_alpha(double raw, double a) { return a * std::tanh(raw / a); }
inline double clamp_alpha_deriv(double alpha, double a) {
    const double r = alpha / a;
    return 1.0 - r * r;  // sech^2(raw/a) expressed through the clamped value
}

void check_inputs(const MafModel& model, std::span<const double> theta,
                  std::span<const double> x) {
    if (static_cast<int>(theta.size()) != model.p ||
        static_cast<int>(x.size()) != model.context_dim) {
        throw std::invalid_argument("maf: input dimension mismatch");
    }
    for (double v : theta) {
        if (!std::isfinite(v)) throw std::invalid_argument("maf: non-finite theta");
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument("maf: non-finite x");
    }
}

}  // namespace

void maf_forward(const MafModel& model, std::span<const double> theta, std::span<const double> x,
                 ForwardCache& cache) {
    check_inputs(model, theta, x);
    const int p = model.p;
    const auto& std_ = model.standardizer;

    cache.u0.resize(p);
    for (int i = 0; i < p; ++i) cache.u0[i] = (theta[i] - std_.theta_mean[i]) / std_.theta_sd[i];
    cache.context.resize(model.context_dim);
    for (int i = 0; i < model.context_dim; ++i) {
        cache.context[i] = (x[i] - std_.x_mean[i]) / std_.x_sd[i];
    }

    cache.tf.resize(model.nets.size());
    cache.log_det = 0.0;
    std::vector<double>* current = &cache.u0;
    for (std::size_t t = 0; t < model.nets.size(); ++t) {
        TransformCache& tc = cache.tf[t];
        tc.input.resize(p);
        for (int i = 0; i < p; ++i) tc.input[i] = (*current)[model.perms[t][i]];
        made_forward(model.nets[t], tc.input, cache.context, tc.trace);
        tc.alpha.resize(p);
        tc.z.resize(p);
        for (int i = 0; i < p; ++i) {
            tc.alpha[i] = clamp_alpha(tc.trace.alpha_raw[i], model.cfg.alpha_clamp);
            tc.z[i] = (tc.input[i] - tc.trace.mu[i]) * std::exp(-tc.alpha[i]);
            cache.log_det -= tc.alpha[i];
        }
        current = &tc.z;
    }
    cache.z = *current;
}

double maf_log_prob_cached(const MafModel& model, ForwardCache& cache,
                           std::span<const double> theta, std::span<const double> x) {
    maf_forward(model, theta, x, cache);
    double base = 0.0;
    for (double z : cache.z) base += -0.5 * z * z - 0.5 * kLog2Pi;
    return base + cache.log_det - model.standardizer.log_theta_jacobian();
}

double maf_log_prob(const MafModel& model, std::span<const double> theta,
                    std::span<const double> x) {
    ForwardCache cache;
    return maf_log_prob_cached(model, cache, theta, x);
}

namespace {

void inverse_into(const MafModel& model, std::span<const double> z,
                  std::span<const double> context, MadeTrace& trace, std::vector<double>& w,
                  std::vector<double>& v, ThetaVector& theta) {
    const int p = model.p;
    const auto& std_ = model.standardizer;
    w.assign(z.begin(), z.end());
    // Invert the stack: transforms in reverse order, each one solved
    // coordinate-by-coordinate in the autoregressive order.
    for (std::size_t t = model.nets.size(); t-- > 0;) {
        v.assign(static_cast<std::size_t>(p), 0.0);
        for (int i = 0; i < p; ++i) {
            made_forward(model.nets[t], v, context, trace);
            const double alpha = clamp_alpha(trace.alpha_raw[i], model.cfg.alpha_clamp);
            v[i] = w[i] * std::exp(alpha) + trace.mu[i];
        }
        for (int i = 0; i < p; ++i) w[model.perms[t][i]] = v[i];
    }
    theta.resize(p);
    for (int i = 0; i < p; ++i) theta[i] = w[i] * std_.theta_sd[i] + std_.theta_mean[i];
}

}  // namespace

ThetaVector maf_inverse(const MafModel& model, std::span<const double> z,
                        std::span<const double> x) {
    if (static_cast<int>(z.size()) != model.p ||
        static_cast<int>(x.size()) != model.context_dim) {
        throw std::invalid_argument("maf_inverse: dimension mismatch");
    }
    std::vector<double> context(model.context_dim);
    for (int i = 0; i < model.context_dim; ++i) {
        context[i] = (x[i] - model.standardizer.x_mean[i]) / model.standardizer.x_sd[i];
    }
    MadeTrace trace;
    std::vector<double> w, v;
    ThetaVector theta;
    inverse_into(model, z, context, trace, w, v, theta);
    return theta;
}

std::vector<ThetaVector> maf_sample(const MafModel& model, std::span<const double> x, int count,
                                    Rng& rng) {
    if (count < 1) throw std::invalid_argument("maf_sample: count must be >= 1");
    if (static_cast<int>(x.size()) != model.context_dim) {
        throw std::invalid_argument("maf_sample: x dimension mismatch");
    }
    const int p = model.p;
    std::vector<double> context(model.context_dim);
    for (int i = 0; i < model.context_dim; ++i) {
        context[i] = (x[i] - model.standardizer.x_mean[i]) / model.standardizer.x_sd[i];
    }

    std::vector<ThetaVector> out;
    out.reserve(static_cast<std::size_t>(count));
    MadeTrace trace;
    std::vector<double> z(static_cast<std::size_t>(p)), w, v;
    for (int s = 0; s < count; ++s) {
        for (int i = 0; i < p; ++i) z[static_cast<std::size_t>(i)] = rng.normal();
        ThetaVector theta;
        inverse_into(model, z, context, trace, w, v, theta);
        out.push_back(std::move(theta));
    }
    return out;
}

void GradBuffer::zero() {
    for (auto& g : nets) {
        for (auto& v : g.hidden_w) std::fill(v.begin(), v.end(), 0.0);
        for (auto& v : g.hidden_b) std::fill(v.begin(), v.end(), 0.0);
        std::fill(g.mu_w.begin(), g.mu_w.end(), 0.0);
        std::fill(g.mu_b.begin(), g.mu_b.end(), 0.0);
        std::fill(g.alpha_w.begin(), g.alpha_w.end(), 0.0);
        std::fill(g.alpha_b.begin(), g.alpha_b.end(), 0.0);
    }
}

void GradBuffer::axpy(double a, const GradBuffer& other) {
    auto add = [a](std::vector<double>& dst, const std::vector<double>& src) {
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
    };
    for (std::size_t n = 0; n < nets.size(); ++n) {
        for (std::size_t l = 0; l < nets[n].hidden_w.size(); ++l) {
            add(nets[n].hidden_w[l], other.nets[n].hidden_w[l]);
            add(nets[n].hidden_b[l], other.nets[n].hidden_b[l]);
        }
        add(nets[n].mu_w, other.nets[n].mu_w);
        add(nets[n].mu_b, other.nets[n].mu_b);
        add(nets[n].alpha_w, other.nets[n].alpha_w);
        add(nets[n].alpha_b, other.nets[n].alpha_b);
    }
}

GradBuffer make_grad_buffer(const MafModel& model) {
    GradBuffer g;
    g.nets.reserve(model.nets.size());
    for (const auto& net : model.nets) g.nets.push_back(make_made_grad(net));
    return g;
}

double maf_logprob_backward(const MafModel& model, std::span<const double> theta,
                            std::span<const double> x, double scale, GradBuffer& grad,
                            ForwardCache& cache) {
    const double logprob = maf_log_prob_cached(model, cache, theta, x);
    maf_backward_from_cache(model, cache, scale, grad);
    return logprob;
}

void maf_backward_from_cache(const MafModel& model, const ForwardCache& cache, double scale,
                             GradBuffer& grad) {
    const int p = model.p;

    // Per-sample NLL = 0.5|z|^2 + const + sum_t sum_i alpha_i + log-jacobian
    // of the standardizer. Backpropagate scale * dNLL.
    std::vector<double> gz(p), gu(p), g_mu(p), g_alpha_raw(p);
    for (int i = 0; i < p; ++i) gz[i] = scale * cache.z[i];

    for (std::size_t t = model.nets.size(); t-- > 0;) {
        const TransformCache& tc = cache.tf[t];
        std::fill(gu.begin(), gu.end(), 0.0);
        for (int i = 0; i < p; ++i) {
            const double e = std::exp(-tc.alpha[i]);
            const double g_alpha = gz[i] * (-tc.z[i]) + scale;  // chain + direct log-det term
            g_mu[i] = -gz[i] * e;
            g_alpha_raw[i] = g_alpha * clamp_alpha_deriv(tc.alpha[i], model.cfg.alpha_clamp);
            gu[i] = gz[i] * e;
        }
        made_backward(model.nets[t], tc.trace, g_mu, g_alpha_raw, grad.nets[t], gu);
        // Route the input gradient back through this transform's permutation.
        for (int i = 0; i < p; ++i) gz[model.perms[t][i]] = gu[i];
    }
}

std::vector<ParamView> param_views(MafModel& model) {
    std::vector<ParamView> views;
    for (auto& net : model.nets) {
        for (auto& layer : net.hidden) {
            views.push_back({layer.w.data(), layer.w.size()});
            views.push_back({layer.b.data(), layer.b.size()});
        }
        views.push_back({net.out_mu.w.data(), net.out_mu.w.size()});
        views.push_back({net.out_mu.b.data(), net.out_mu.b.size()});
        views.push_back({net.out_alpha.w.data(), net.out_alpha.w.size()});
        views.push_back({net.out_alpha.b.data(), net.out_alpha.b.size()});
    }
    return views;
}

std::vector<ParamView> grad_views(GradBuffer& grad) {
    std::vector<ParamView> views;
    for (auto& g : grad.nets) {
        for (std::size_t l = 0; l < g.hidden_w.size(); ++l) {
            views.push_back({g.hidden_w[l].data(), g.hidden_w[l].size()});
            views.push_back({g.hidden_b[l].data(), g.hidden_b[l].size()});
        }
        views.push_back({g.mu_w.data(), g.mu_w.size()});
        views.push_back({g.mu_b.data(), g.mu_b.size()});
        views.push_back({g.alpha_w.data(), g.alpha_w.size()});
        views.push_back({g.alpha_b.data(), g.alpha_b.size()});
    }
    return views;
}

std::size_t param_count(const MafModel& model) {
    std::size_t count = 0;
    for (const auto& net : model.nets) {
        for (const auto& layer : net.hidden) count += layer.w.size() + layer.b.size();
        count += net.out_mu.w.size() + net.out_mu.b.size();
        count += net.out_alpha.w.size() + net.out_alpha.b.size();
    }
    return count;
}

}  // namespace ergm::flow
