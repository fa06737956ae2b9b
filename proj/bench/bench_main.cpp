// Compares the OpenMP kernels against their serial reference implementations:
// batch network simulation, minibatch NLL gradients, and incremental change
// statistics vs full recomputation.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ergm/flow/train.hpp"
#include "ergm/npe.hpp"
#include "ergm/reference.hpp"
#include "ergm/sim.hpp"

using namespace ergm;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <typename Fn>
double timed(Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    return seconds_since(start);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n\n", omp_get_max_threads());
#else
    std::printf("OpenMP not available; parallel paths run serially\n\n");
#endif

    StatsConfig stats;
    Rng rng(42);

    // Batch simulation: serial reference vs OpenMP fan-out.
    {
        SimConfig sim;
        sim.n = 24;
        sim.iterations = 2000;
        sim.seed = 7;
        std::vector<ThetaVector> thetas;
        for (int b = 0; b < 256; ++b) {
            thetas.push_back({-1.0 + rng.uniform(), 0.4 * rng.uniform(), 0.2 * rng.uniform()});
        }
        TrainingSet serial, parallel;
        const double t_serial = timed([&] { serial = simulate_stats_batch_serial(thetas, stats, sim); });
        const double t_parallel = timed([&] { parallel = simulate_stats_batch(thetas, stats, sim); });
        const bool identical = serial.xs == parallel.xs && serial.thetas == parallel.thetas;
        std::printf("batch simulation (256 x n=24, 2000 iters)\n");
        std::printf("  serial   %8.3f s\n", t_serial);
        std::printf("  openmp   %8.3f s   speedup %.2fx   identical: %s\n\n", t_parallel,
                    t_serial / t_parallel, identical ? "yes" : "NO");
    }

    // Minibatch gradient: serial vs blocked OpenMP reduction.
    {
        SimConfig sim;
        sim.n = 12;
        sim.iterations = 400;
        sim.seed = 11;
        PriorSpec prior = PriorSpec::normal({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
        TrainingSet data = simulate_prior_round(prior, 2048, stats, sim);

        flow::MafConfig mcfg;
        flow::MafModel model = flow::make_maf(3, 3, mcfg, 5, flow::WeightInit::random);
        model.standardizer = flow::Standardizer::fit(data.thetas, data.xs, 3, 3);
        std::vector<int> rows(data.size());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);

        flow::GradBuffer g_serial = flow::make_grad_buffer(model);
        flow::GradBuffer g_parallel = flow::make_grad_buffer(model);
        double loss_serial = 0.0, loss_parallel = 0.0;
        const double t_serial =
            timed([&] { loss_serial = flow::nll_grad_serial(model, data, rows, g_serial); });
        const double t_parallel =
            timed([&] { loss_parallel = flow::nll_grad(model, data, rows, g_parallel); });
        const bool identical = loss_serial == loss_parallel;
        std::printf("minibatch NLL gradient (2048 rows, 5x50 MAF)\n");
        std::printf("  serial   %8.3f s\n", t_serial);
        std::printf("  openmp   %8.3f s   speedup %.2fx   identical loss: %s\n\n", t_parallel,
                    t_serial / t_parallel, identical ? "yes" : "NO");
    }

    // Incremental change statistics vs full recomputation.
    {
        const int n = 64;
        Graph g(n);
        Rng gr(3);
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (gr.uniform() < 0.1) g.toggle(i, j);
            }
        }
        const int reps = 20000;
        ChangeStatsScratch scratch;
        double sink = 0.0;
        const double t_incremental = timed([&] {
            double out[3];
            for (int r = 0; r < reps; ++r) {
                const int i = static_cast<int>(gr.uniform_below(n));
                int j = static_cast<int>(gr.uniform_below(n - 1));
                if (j >= i) ++j;
                change_stats(g, i, j, stats, std::span<double>(out, 3), scratch);
                sink += out[1];
            }
        });
        Rng gr2(3);
        const double t_full = timed([&] {
            for (int r = 0; r < reps / 100; ++r) {
                const int i = static_cast<int>(gr2.uniform_below(n));
                int j = static_cast<int>(gr2.uniform_below(n - 1));
                if (j >= i) ++j;
                const StatsVector d = reference_change_stats(g, i, j, stats);
                sink += d[1];
            }
        });
        std::printf("change statistics on n=64 (per-toggle cost)\n");
        std::printf("  incremental  %10.1f ns\n", 1e9 * t_incremental / reps);
        std::printf("  full recompute %8.1f ns   ratio %.0fx   (sink %.3f)\n",
                    1e9 * t_full / (reps / 100), (t_full / (reps / 100)) / (t_incremental / reps),
                    sink);
    }
    return 0;
}
