#include "ergm/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ergm/enumerate.hpp"
#include "ergm/flow/checkpoint.hpp"
#include "ergm/flow/train.hpp"
#include "ergm/io.hpp"
#include "ergm/numeric.hpp"
#include "ergm/reference.hpp"

namespace ergm {

namespace {

using nlohmann::ordered_json;

std::string hex64(std::uint64_t value) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

void write_manifest(const std::string& out_dir, const std::string& command, const RunConfig& cfg,
                    ordered_json extra) {
    const std::string echo = cfg.canonical_json();
    ordered_json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["command"] = command;
    manifest["config_hash"] = hex64(fnv1a(echo));
    manifest["seed"] = cfg.seed;
    manifest["config"] = ordered_json::parse(echo);
    for (auto& item : extra.items()) manifest[item.key()] = item.value();
    write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

ordered_json output_entry(const std::string& out_dir, const std::string& name) {
    const std::string content = read_text_file(out_dir + "/" + name);
    return ordered_json{{"file", name}, {"fnv1a", hex64(fnv1a(content))}};
}

ordered_json history_json(const flow::TrainHistory& history) {
    return ordered_json{{"train_nll", history.train_nll},
                        {"val_nll", history.val_nll},
                        {"best_epoch", history.best_epoch},
                        {"best_val_nll", history.best_val_nll}};
}

int run_guarded(std::ostream& log, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const LeakageError& e) {
        log << "numerical failure: " << e.what() << "\n";
        return kExitNumericalError;
    } catch (const flow::NumericalError& e) {
        log << "numerical failure: " << e.what() << "\n";
        return kExitNumericalError;
    } catch (const std::invalid_argument& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

void ensure_dir(const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
    return run_guarded(log, [&]() {
        ensure_dir(out_dir);
        TrainingSet data;
        if (cfg.npe.B == 0) {
            data.theta_dim = cfg.stats.dim();
            data.x_dim = cfg.stats.dim();
        } else {
            data = simulate_prior_round(cfg.prior, cfg.npe.B, cfg.stats, cfg.make_sim_config(),
                                        cfg.workers);
        }
        write_training_set(out_dir + "/train.csv", data);
        write_manifest(out_dir, "simulate", cfg,
                       {{"pairs", data.size()},
                        {"outputs", ordered_json::array({output_entry(out_dir, "train.csv")})}});
        log << "simulated " << data.size() << " pairs -> " << out_dir << "/train.csv\n";
        return kExitOk;
    });
}

int cmd_train(const RunConfig& cfg, const std::string& mode, const std::string& data_path,
              const std::string& out_dir, std::ostream& log) {
    return run_guarded(log, [&]() {
        if (mode != "npe" && mode != "snpe") {
            throw ConfigError("train mode must be 'npe' or 'snpe'");
        }
        ensure_dir(out_dir);
        try {
            if (mode == "npe") {
                TrainingSet data;
                if (!data_path.empty()) {
                    data = read_training_set(data_path);
                } else {
                    data = simulate_prior_round(cfg.prior, cfg.npe.B, cfg.stats,
                                                cfg.make_sim_config(), cfg.workers);
                }
                TrainedNpe trained = train_npe(data, cfg.stats, cfg.make_npe_config());
                flow::save_checkpoint(out_dir + "/checkpoint.json", trained.model, cfg.stats);
                write_manifest(out_dir, "train", cfg,
                               {{"mode", "npe"},
                                {"pairs", data.size()},
                                {"history", history_json(trained.history)},
                                {"outputs", ordered_json::array(
                                                {output_entry(out_dir, "checkpoint.json")})}});
                log << "npe checkpoint -> " << out_dir << "/checkpoint.json (best epoch "
                    << trained.history.best_epoch << ")\n";
            } else {
                const SnpeConfig snpe_cfg = cfg.make_snpe_config();
                SnpeResult result = train_snpe(snpe_cfg, cfg.prior, cfg.stats,
                                               cfg.make_sim_config());
                flow::save_checkpoint(out_dir + "/checkpoint.json", result.model, cfg.stats);
                write_training_set(out_dir + "/snpe_data.csv", result.data);
                ordered_json rounds = ordered_json::array();
                for (const SnpeRoundDiag& diag : result.rounds) {
                    rounds.push_back({{"round", diag.round},
                                      {"cumulative_pairs", diag.cumulative_pairs},
                                      {"posterior_mean", diag.posterior_mean},
                                      {"posterior_sd", diag.posterior_sd},
                                      {"leakage_fraction", diag.leakage_fraction},
                                      {"history", history_json(diag.history)}});
                }
                write_manifest(out_dir, "train", cfg,
                               {{"mode", "snpe"},
                                {"rounds", rounds},
                                {"outputs",
                                 ordered_json::array({output_entry(out_dir, "checkpoint.json"),
                                                      output_entry(out_dir, "snpe_data.csv")})}});
                log << "snpe checkpoint -> " << out_dir << "/checkpoint.json ("
                    << result.rounds.size() << " rounds)\n";
            }
        } catch (const flow::NumericalError& e) {
            // Abort with a diagnostic dump and the numerical-failure code.
            ordered_json diag;
            diag["error"] = e.what();
            diag["config"] = ordered_json::parse(cfg.canonical_json());
            write_text_file(out_dir + "/diagnostic.json", diag.dump(2) + "\n");
            log << "numerical failure: " << e.what() << " (diagnostic.json written)\n";
            return kExitNumericalError;
        }
        return kExitOk;
    });
}

int cmd_sample(const RunConfig& cfg, const std::string& checkpoint_path,
               const StatsVector& x_obs, int count, bool truncate, const std::string& out_dir,
               std::ostream& log) {
    return run_guarded(log, [&]() {
        ensure_dir(out_dir);
        const flow::Checkpoint ck = flow::load_checkpoint(checkpoint_path);
        if (static_cast<int>(x_obs.size()) != ck.model.context_dim) {
            throw ConfigError("x_obs dimension does not match the checkpoint");
        }
        if (ck.model.p != static_cast<int>(cfg.prior.mean.size())) {
            throw ConfigError("prior dimension does not match the checkpoint");
        }
        const PosteriorSamples result =
            posterior_sample(ck.model, x_obs, count, cfg.prior, truncate, cfg.seed);
        write_samples(out_dir + "/samples.csv", result.samples);
        write_manifest(out_dir, "sample", cfg,
                       {{"count", result.samples.size()},
                        {"x_obs", x_obs},
                        {"truncate", truncate},
                        {"rejection_fraction", result.rejection_fraction},
                        {"outputs", ordered_json::array({output_entry(out_dir, "samples.csv")})}});
        log << "wrote " << result.samples.size() << " samples (rejection fraction "
            << result.rejection_fraction << ")\n";
        return kExitOk;
    });
}

int cmd_exchange(const RunConfig& cfg, const StatsVector& x_obs, const std::string& out_dir,
                 std::ostream& log) {
    return run_guarded(log, [&]() {
        ensure_dir(out_dir);
        if (static_cast<int>(x_obs.size()) != cfg.stats.dim()) {
            throw ConfigError("x_obs dimension does not match stat_set");
        }
        const PosteriorChain chain = run_exchange(x_obs, cfg.prior, cfg.proposal, cfg.stats,
                                                  cfg.make_sim_config(), cfg.exchange);
        write_chain(out_dir + "/chain.csv", chain);
        const ThetaVector mean = chain.posterior_mean();
        const ThetaVector sd = chain.posterior_sd();
        write_manifest(out_dir, "exchange", cfg,
                       {{"x_obs", x_obs},
                        {"acceptance_rate", chain.acceptance_rate()},
                        {"posterior_mean", mean},
                        {"posterior_sd", sd},
                        {"outputs", ordered_json::array({output_entry(out_dir, "chain.csv")})}});
        log << "acceptance rate " << chain.acceptance_rate() << "\n";
        for (std::size_t k = 0; k < mean.size(); ++k) {
            log << stat_name(cfg.stats.stat_set[k]) << ": posterior mean " << mean[k] << ", sd "
                << sd[k] << "\n";
        }
        return kExitOk;
    });
}

int cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint_path,
                 const std::string& out_dir, std::ostream& log) {
    return run_guarded(log, [&]() {
        ensure_dir(out_dir);
        const flow::Checkpoint ck = flow::load_checkpoint(checkpoint_path);
        const SimConfig sim = cfg.make_sim_config();
        const std::vector<EvalCase> cases = stratified_truths(cfg.make_truth_config(), cfg.stats, sim);
        if (cases.empty()) {
            throw ConfigError("evaluate: no cases requested (all strata targets are zero)");
        }
        const auto [bias, magnitude] = run_bias_eval(cases, ck.model, cfg.stats, sim, cfg.eval);
        write_text_file(out_dir + "/bias_report.csv", bias_report_to_csv(bias, cfg.stats));
        write_text_file(out_dir + "/magnitude_report.csv",
                        magnitude_report_to_csv(magnitude, cfg.stats));

        ordered_json summary;
        summary["cases"] = cases.size();
        ordered_json case_list = ordered_json::array();
        for (const EvalCase& c : cases) {
            case_list.push_back({{"case_id", c.case_id},
                                 {"stratum", c.stratum},
                                 {"theta_true", c.theta_true}});
        }
        summary["truths"] = case_list;
        summary["me"] = bias.me;
        summary["mae"] = bias.mae;
        summary["rmse"] = bias.rmse;
        write_text_file(out_dir + "/summary.json", summary.dump(2) + "\n");

        write_manifest(out_dir, "evaluate", cfg,
                       {{"cases", cases.size()},
                        {"outputs", ordered_json::array(
                                        {output_entry(out_dir, "bias_report.csv"),
                                         output_entry(out_dir, "magnitude_report.csv"),
                                         output_entry(out_dir, "summary.json")})}});
        log << "evaluated " << cases.size() << " cases -> " << out_dir << "\n";
        return kExitOk;
    });
}

int cmd_compare(const RunConfig& cfg, const std::string& checkpoint_path,
                const std::string& out_dir, std::ostream& log) {
    return run_guarded(log, [&]() {
        ensure_dir(out_dir);
        const flow::Checkpoint ck = flow::load_checkpoint(checkpoint_path);
        const SimConfig sim = cfg.make_sim_config();
        const std::vector<EvalCase> cases = stratified_truths(cfg.make_truth_config(), cfg.stats, sim);
        if (cases.empty()) {
            throw ConfigError("compare: no cases requested (all strata targets are zero)");
        }
        if (cfg.compare_case < 0 || cfg.compare_case >= static_cast<int>(cases.size())) {
            throw ConfigError("compare: compare_case index out of range");
        }
        CompareSettings settings;
        settings.replicates = cfg.compare_replicates;
        settings.posterior_draws = cfg.eval.posterior_draws;
        settings.workers = cfg.workers;
        settings.seed = cfg.seed;
        const ComparePairs pairs =
            compare_methods(cases[cfg.compare_case], ck.model, cfg.prior, cfg.proposal,
                            cfg.exchange, cfg.stats, sim, settings);
        write_text_file(out_dir + "/compare_pairs.csv", compare_pairs_to_csv(pairs, cfg.stats));
        write_text_file(out_dir + "/compare_long.csv",
                        compare_pairs_to_long_csv(pairs, cfg.stats));
        write_manifest(out_dir, "compare", cfg,
                       {{"case_id", cases[cfg.compare_case].case_id},
                        {"replicates", settings.replicates},
                        {"outputs", ordered_json::array(
                                        {output_entry(out_dir, "compare_pairs.csv"),
                                         output_entry(out_dir, "compare_long.csv")})}});
        log << "compared npe vs exchange on case " << cfg.compare_case << " -> " << out_dir << "\n";
        return kExitOk;
    });
}

namespace {

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

int cmd_selftest(std::ostream& log) {
    int failures = 0;
    const auto check = [&](bool ok, const std::string& what) {
        log << (ok ? "PASS" : "FAIL") << "  " << what << "\n";
        if (!ok) ++failures;
    };

    // Statistics against the serial reference implementation.
    {
        StatsConfig stats;
        Rng rng(20240817);
        bool stats_ok = true;
        bool change_ok = true;
        for (int trial = 0; trial < 100 && (stats_ok || change_ok); ++trial) {
            const int n = 4 + static_cast<int>(rng.uniform_below(9));
            Graph g(n);
            for (int i = 0; i < n; ++i) {
                for (int j = i + 1; j < n; ++j) {
                    if (rng.uniform() < 0.35) g.toggle(i, j);
                }
            }
            const StatsVector fast = summary_stats(g, stats);
            const StatsVector slow = reference_summary_stats(g, stats);
            for (std::size_t k = 0; k < fast.size(); ++k) {
                if (!close(fast[k], slow[k], 1e-9)) stats_ok = false;
            }
            const int i = static_cast<int>(rng.uniform_below(n));
            int j = static_cast<int>(rng.uniform_below(n - 1));
            if (j >= i) ++j;
            const StatsVector inc = change_stats(g, i, j, stats);
            const StatsVector full = reference_change_stats(g, i, j, stats);
            for (std::size_t k = 0; k < inc.size(); ++k) {
                if (!close(inc[k], full[k], 1e-9)) change_ok = false;
            }
        }
        check(stats_ok, "summary_stats matches the O(n^3) reference on random graphs");
        check(change_ok, "change_stats matches full recomputation on random graphs");
    }

    // Exact enumeration identities.
    {
        StatsConfig edges_only;
        edges_only.stat_set = {Stat::edges};
        const ExactModel m3 = build_exact_model(3, edges_only);
        check(close(exact_normalizer({0.0}, m3), 8.0, 1e-9), "n=3 edges-only, theta=0: c = 8");
        check(close(exact_normalizer({std::log(2.0)}, m3), 27.0, 1e-9),
              "n=3 edges-only, theta=log 2: c = 27");
        StatsConfig full;
        const ExactModel m4 = build_exact_model(4, full);
        check(close(exact_normalizer({0.0, 0.0, 0.0}, m4), 64.0, 1e-9),
              "n=4 full stat set, theta=0: c = 64");
        double total = 0.0;
        for (const auto& [h, prob] : exact_stat_distribution({0.25, -0.5, 0.1}, m4)) total += prob;
        check(close(total, 1.0, 1e-12), "exact distribution sums to 1");
    }

    // Sampler against the exact distribution (light version of the full TV check).
    {
        StatsConfig stats;
        const ExactModel model = build_exact_model(4, stats);
        const ThetaVector theta = {0.4, -0.3, 0.2};
        std::map<StatsVector, double> exact;
        for (const auto& [h, prob] : exact_stat_distribution(theta, model)) exact[h] = prob;

        Graph g(4);
        Rng rng(7);
        ChangeStatsScratch scratch;
        std::map<StatsVector, double> counts;
        const int burn = 20000;
        const int draws = 200000;
        for (int t = 0; t < burn; ++t) mh_step_inplace(g, theta, stats, rng, scratch);
        for (int t = 0; t < draws; ++t) {
            mh_step_inplace(g, theta, stats, rng, scratch);
            if (t % 5 == 0) counts[summary_stats(g, stats)] += 1.0;
        }
        double tv = 0.0;
        const double total = static_cast<double>(draws / 5);
        for (const auto& [h, prob] : exact) {
            const auto it = counts.find(h);
            const double freq = it == counts.end() ? 0.0 : it->second / total;
            tv += std::abs(freq - prob);
        }
        check(tv / 2.0 < 0.05, "MH sampler matches exact statistics distribution (TV < 0.05)");
    }

    log << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
    return failures == 0 ? kExitOk : kExitOracleFailure;
}

}  // namespace ergm
