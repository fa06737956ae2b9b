#include "ergm/flow/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ergm/numeric.hpp"

namespace ergm::flow {

namespace {
constexpr int kBlockRows = 64;
constexpr std::uint64_t kSplitTag = 0x73706c74ULL;
constexpr std::uint64_t kShuffleTag = 0x73687566ULL;
constexpr std::uint64_t kAtomTag = 0x61746f6dULL;

void check_finite(double loss, const char* what) {
    if (!std::isfinite(loss)) {
        throw NumericalError(std::string(what) + ": non-finite loss");
    }
}

template <typename Fn>
void for_each_block(std::size_t count, int workers, Fn&& fn) {
    const std::size_t nblocks = (count + kBlockRows - 1) / kBlockRows;
#ifdef _OPENMP
    if (workers != 1) {
        if (workers > 0) {
#pragma omp parallel for schedule(dynamic) num_threads(workers)
            for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b) {
                fn(static_cast<std::size_t>(b));
            }
        } else {
#pragma omp parallel for schedule(dynamic)
            for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b) {
                fn(static_cast<std::size_t>(b));
            }
        }
        return;
    }
#else
    (void)workers;
#endif
    for (std::size_t b = 0; b < nblocks; ++b) fn(b);
}

}  // namespace

AdamState make_adam(MafModel& model, double learning_rate) {
    AdamState state;
    state.learning_rate = learning_rate;
    for (const ParamView& view : param_views(model)) {
        state.m.emplace_back(view.size, 0.0);
        state.v.emplace_back(view.size, 0.0);
    }
    return state;
}

void adam_step(AdamState& state, MafModel& model, GradBuffer& grads) {
    const std::vector<ParamView> params = param_views(model);
    const std::vector<ParamView> gviews = grad_views(grads);
    if (params.size() != gviews.size() || params.size() != state.m.size()) {
        throw std::invalid_argument("adam_step: slot count mismatch");
    }
    state.step += 1;
    const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t s = 0; s < params.size(); ++s) {
        if (params[s].size != gviews[s].size || params[s].size != state.m[s].size()) {
            throw std::invalid_argument("adam_step: shape mismatch");
        }
        double* w = params[s].data;
        const double* g = gviews[s].data;
        double* m = state.m[s].data();
        double* v = state.v[s].data();
        for (std::size_t i = 0; i < params[s].size; ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / b1t;
            const double vhat = v[i] / b2t;
            w[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

namespace {

double nll_grad_impl(const MafModel& model, const TrainingSet& data, std::span<const int> rows,
                     GradBuffer* grad, int workers) {
    if (rows.empty()) throw std::invalid_argument("nll_grad: empty batch");
    const double row_scale = 1.0 / static_cast<double>(rows.size());
    const std::size_t nblocks = (rows.size() + kBlockRows - 1) / kBlockRows;

    std::vector<double> block_loss(nblocks, 0.0);
    std::vector<GradBuffer> block_grads;
    if (grad != nullptr) {
        block_grads.reserve(nblocks);
        for (std::size_t b = 0; b < nblocks; ++b) block_grads.push_back(make_grad_buffer(model));
    }

    for_each_block(rows.size(), workers, [&](std::size_t b) {
        ForwardCache cache;
        const std::size_t lo = b * kBlockRows;
        const std::size_t hi = std::min(rows.size(), lo + kBlockRows);
        double acc = 0.0;
        for (std::size_t r = lo; r < hi; ++r) {
            const int row = rows[r];
            const auto theta = data.theta_row(row);
            const auto x = data.x_row(row);
            double logprob;
            if (grad != nullptr) {
                logprob = maf_logprob_backward(model, theta, x, row_scale, block_grads[b], cache);
            } else {
                logprob = maf_log_prob_cached(model, cache, theta, x);
            }
            acc -= logprob;
        }
        block_loss[b] = acc;
    });

    double loss = 0.0;
    for (std::size_t b = 0; b < nblocks; ++b) {
        loss += block_loss[b];
        if (grad != nullptr) grad->axpy(1.0, block_grads[b]);
    }
    return loss * row_scale;
}

}  // namespace

double nll_grad(const MafModel& model, const TrainingSet& data, std::span<const int> rows,
                GradBuffer& grad, int workers) {
    grad.zero();
    return nll_grad_impl(model, data, rows, &grad, workers);
}

double nll_grad_serial(const MafModel& model, const TrainingSet& data, std::span<const int> rows,
                       GradBuffer& grad) {
    grad.zero();
    return nll_grad_impl(model, data, rows, &grad, 1);
}

double mean_nll(const MafModel& model, const TrainingSet& data, std::span<const int> rows) {
    return nll_grad_impl(model, data, rows, nullptr, 0);
}

namespace {

double atomic_impl(const MafModel& model, const TrainingSet& data, std::span<const int> rows,
                   std::span<const int> atom_rows, int atoms_per_row, const PriorSpec& prior,
                   GradBuffer* grad, int workers) {
    if (rows.empty()) throw std::invalid_argument("atomic loss: empty batch");
    if (atoms_per_row < 2) throw std::invalid_argument("atomic loss: need at least 2 atoms");
    if (atom_rows.size() != rows.size() * static_cast<std::size_t>(atoms_per_row)) {
        throw std::invalid_argument("atomic loss: atom table size mismatch");
    }
    const double row_scale = 1.0 / static_cast<double>(rows.size());
    const std::size_t nblocks = (rows.size() + kBlockRows - 1) / kBlockRows;
    const CholFactor prior_chol = cholesky(prior.covariance);

    std::vector<double> block_loss(nblocks, 0.0);
    std::vector<GradBuffer> block_grads;
    if (grad != nullptr) {
        block_grads.reserve(nblocks);
        for (std::size_t b = 0; b < nblocks; ++b) block_grads.push_back(make_grad_buffer(model));
    }

    for_each_block(rows.size(), workers, [&](std::size_t b) {
        std::vector<ForwardCache> caches(atoms_per_row);
        std::vector<double> scores(atoms_per_row);
        std::vector<double> softmax(atoms_per_row);
        ThetaVector theta_scratch(model.p);
        const std::size_t lo = b * kBlockRows;
        const std::size_t hi = std::min(rows.size(), lo + kBlockRows);
        double acc = 0.0;
        for (std::size_t r = lo; r < hi; ++r) {
            const auto x = data.x_row(rows[r]);
            for (int a = 0; a < atoms_per_row; ++a) {
                const int atom_row = atom_rows[r * atoms_per_row + a];
                const auto theta = data.theta_row(atom_row);
                theta_scratch.assign(theta.begin(), theta.end());
                const double logq = maf_log_prob_cached(model, caches[a], theta, x);
                scores[a] = logq - log_mvn_density(theta_scratch, prior.mean, prior_chol);
            }
            const double lse = logsumexp(scores);
            acc += lse - scores[0];  // atom 0 is the row's own theta
            if (grad != nullptr) {
                for (int a = 0; a < atoms_per_row; ++a) {
                    softmax[a] = std::exp(scores[a] - lse);
                }
                for (int a = 0; a < atoms_per_row; ++a) {
                    const double coeff = ((a == 0 ? 1.0 : 0.0) - softmax[a]) * row_scale;
                    if (coeff != 0.0) {
                        maf_backward_from_cache(model, caches[a], coeff, block_grads[b]);
                    }
                }
            }
        }
        block_loss[b] = acc;
    });

    double loss = 0.0;
    for (std::size_t b = 0; b < nblocks; ++b) {
        loss += block_loss[b];
        if (grad != nullptr) grad->axpy(1.0, block_grads[b]);
    }
    return loss * row_scale;
}

}  // namespace

double atomic_nll_grad(const MafModel& model, const TrainingSet& data, std::span<const int> rows,
                       std::span<const int> atom_rows, int atoms_per_row, const PriorSpec& prior,
                       GradBuffer& grad, int workers) {
    grad.zero();
    return atomic_impl(model, data, rows, atom_rows, atoms_per_row, prior, &grad, workers);
}

double atomic_mean_nll(const MafModel& model, const TrainingSet& data, std::span<const int> rows,
                       std::span<const int> atom_rows, int atoms_per_row,
                       const PriorSpec& prior) {
    return atomic_impl(model, data, rows, atom_rows, atoms_per_row, prior, nullptr, 0);
}

namespace {

std::vector<std::vector<double>> snapshot_params(MafModel& model) {
    std::vector<std::vector<double>> out;
    for (const ParamView& view : param_views(model)) {
        out.emplace_back(view.data, view.data + view.size);
    }
    return out;
}

void restore_params(MafModel& model, const std::vector<std::vector<double>>& snapshot) {
    const std::vector<ParamView> views = param_views(model);
    for (std::size_t s = 0; s < views.size(); ++s) {
        std::copy(snapshot[s].begin(), snapshot[s].end(), views[s].data);
    }
}

// Fills atoms for each row of `batch`: the row itself first, then
// atoms_per_row - 1 distinct other rows of the same minibatch.
void sample_atoms(std::span<const int> batch, int atoms_per_row, Rng& rng,
                  std::vector<int>& atom_rows, std::vector<int>& scratch) {
    atom_rows.resize(batch.size() * static_cast<std::size_t>(atoms_per_row));
    for (std::size_t r = 0; r < batch.size(); ++r) {
        scratch.clear();
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (i != r) scratch.push_back(batch[i]);
        }
        int* dst = atom_rows.data() + r * atoms_per_row;
        dst[0] = batch[r];
        for (int a = 1; a < atoms_per_row; ++a) {
            const std::size_t pick = static_cast<std::size_t>(
                rng.uniform_below(static_cast<std::int64_t>(scratch.size())));
            dst[a] = scratch[pick];
            scratch[pick] = scratch.back();
            scratch.pop_back();
        }
    }
}

}  // namespace

TrainHistory fit_maf(MafModel& model, const TrainingSet& data, const FitConfig& cfg) {
    if (data.size() == 0) throw std::invalid_argument("fit_maf: empty training set");
    if (cfg.batch_size < 1) throw std::invalid_argument("fit_maf: batch_size must be >= 1");
    if (cfg.validation_fraction < 0.0 || cfg.validation_fraction > 0.5) {
        throw std::invalid_argument("fit_maf: validation_fraction must lie in [0, 0.5]");
    }
    const bool atomic = cfg.atoms_per_batch >= 2;
    if (atomic) {
        if (cfg.prior == nullptr) throw std::invalid_argument("fit_maf: atomic loss needs a prior");
        if (cfg.atoms_per_batch > cfg.batch_size) {
            throw std::invalid_argument("fit_maf: atoms_per_batch must be <= batch_size");
        }
    }

    // Deterministic split: shuffle once, carve off the validation block.
    std::vector<int> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(mix_seed(cfg.seed, kSplitTag));
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(split_rng.uniform_below(static_cast<std::int64_t>(i)));
        std::swap(order[i - 1], order[j]);
    }
    const std::size_t n_val =
        static_cast<std::size_t>(cfg.validation_fraction * static_cast<double>(order.size()));
    std::vector<int> val_rows(order.begin(), order.begin() + n_val);
    std::vector<int> train_rows(order.begin() + n_val, order.end());
    if (train_rows.empty()) throw std::invalid_argument("fit_maf: no training rows after split");

    // Atom sets for scoring the validation set under the atomic loss are
    // fixed once so the selection metric is comparable across epochs.
    std::vector<int> val_atoms, atom_scratch;
    if (atomic && !val_rows.empty()) {
        Rng val_atom_rng(mix_seed(cfg.seed, kAtomTag, 0xffffffffULL));
        sample_atoms(val_rows, std::min<int>(cfg.atoms_per_batch, static_cast<int>(val_rows.size())),
                     val_atom_rng, val_atoms, atom_scratch);
    }
    const int val_atoms_per_row =
        atomic && !val_rows.empty()
            ? std::min<int>(cfg.atoms_per_batch, static_cast<int>(val_rows.size()))
            : 0;

    auto selection_nll = [&]() {
        const std::span<const int> rows = val_rows.empty() ? std::span<const int>(train_rows)
                                                           : std::span<const int>(val_rows);
        if (!atomic) return mean_nll(model, data, rows);
        if (val_rows.empty()) {
            // Degenerate configuration; score plain NLL on train rows.
            return mean_nll(model, data, rows);
        }
        return atomic_mean_nll(model, data, val_rows, val_atoms, val_atoms_per_row, *cfg.prior);
    };

    TrainHistory history;
    double best = selection_nll();
    check_finite(best, "fit_maf (initial score)");
    history.best_val_nll = best;
    history.best_epoch = -1;
    std::vector<std::vector<double>> best_params = snapshot_params(model);

    AdamState adam = make_adam(model, cfg.learning_rate);
    GradBuffer grad = make_grad_buffer(model);
    std::vector<int> batch_atoms;
    int since_best = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(cfg.seed, kShuffleTag, static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = train_rows.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform_below(static_cast<std::int64_t>(i)));
            std::swap(train_rows[i - 1], train_rows[j]);
        }
        Rng atom_rng(mix_seed(cfg.seed, kAtomTag, static_cast<std::uint64_t>(epoch)));

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < train_rows.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(train_rows.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const std::span<const int> batch(train_rows.data() + start, stop - start);
            double loss;
            if (atomic && static_cast<int>(batch.size()) >= cfg.atoms_per_batch) {
                sample_atoms(batch, cfg.atoms_per_batch, atom_rng, batch_atoms, atom_scratch);
                loss = atomic_nll_grad(model, data, batch, batch_atoms, cfg.atoms_per_batch,
                                       *cfg.prior, grad, cfg.workers);
            } else {
                loss = nll_grad(model, data, batch, grad, cfg.workers);
            }
            check_finite(loss, "fit_maf");
            adam_step(adam, model, grad);
            epoch_loss += loss;
            ++batches;
        }
        history.train_nll.push_back(batches > 0 ? epoch_loss / static_cast<double>(batches) : 0.0);

        const double score = selection_nll();
        check_finite(score, "fit_maf (validation)");
        history.val_nll.push_back(score);
        if (score < best) {
            best = score;
            history.best_val_nll = best;
            history.best_epoch = epoch;
            best_params = snapshot_params(model);
            since_best = 0;
        } else {
            ++since_best;
            if (cfg.early_stop_patience > 0 && since_best >= cfg.early_stop_patience) break;
        }
    }

    restore_params(model, best_params);
    return history;
}

}  // namespace ergm::flow
