#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ergm/commands.hpp"

namespace {

// "1.5,2,3" -> vector
ergm::StatsVector parse_vector(const std::string& text) {
    ergm::StatsVector out;
    std::stringstream in(text);
    std::string field;
    while (std::getline(in, field, ',')) out.push_back(std::stod(field));
    return out;
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
    auto* config = cmd->add_option("--config", opts.config_path, "JSON configuration file");
    if (config_required) config->required();
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config output_dir)");
    cmd->add_option("--set", opts.overrides,
                    "override a config key, e.g. --set npe.B=1000 (repeatable; flags take "
                    "precedence over the file)");
    cmd->add_option("--seed", opts.seed, "override the global seed");
    cmd->add_option("--workers", opts.workers, "worker threads for parallel fan-out (0 = all)");
}

ergm::RunConfig load_config(const CommonOpts& opts) {
    std::vector<std::string> overrides = opts.overrides;
    if (opts.seed) overrides.push_back("seed=" + std::to_string(*opts.seed));
    if (opts.workers) overrides.push_back("workers=" + std::to_string(*opts.workers));
    return ergm::RunConfig::from_file_with_overrides(opts.config_path, overrides);
}

std::string resolve_out(const CommonOpts& opts, const ergm::RunConfig& cfg) {
    return opts.out_dir.empty() ? cfg.output_dir : opts.out_dir;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ERGM simulation-based inference toolkit"};
    app.require_subcommand(1);

    CommonOpts sim_opts, train_opts, sample_opts, eval_opts, compare_opts;
    std::string train_mode = "npe";
    std::string train_data;
    std::string checkpoint;
    std::string x_obs_text;
    int sample_count = 1000;
    bool truncate = false;

    auto* simulate = app.add_subcommand("simulate", "simulate prior-round (theta, x) pairs");
    add_common(simulate, sim_opts);

    auto* train = app.add_subcommand("train", "train an amortised NPE or a sequential SNPE");
    add_common(train, train_opts);
    train->add_option("--mode", train_mode, "npe or snpe")->check(CLI::IsMember({"npe", "snpe"}));
    train->add_option("--data", train_data, "existing training CSV (otherwise simulated)");

    auto* sample = app.add_subcommand("sample", "draw posterior samples from a checkpoint");
    add_common(sample, sample_opts);
    sample->add_option("--checkpoint", checkpoint, "checkpoint JSON")->required();
    sample->add_option("--x-obs", x_obs_text, "observed statistics, comma separated")->required();
    sample->add_option("--count", sample_count, "number of draws");
    sample->add_flag("--truncate", truncate, "reject draws outside the prior support box");

    CommonOpts exchange_opts;
    std::string exchange_x_obs;
    auto* exchange = app.add_subcommand("exchange", "reference Bayesian fit via the exchange sampler");
    add_common(exchange, exchange_opts);
    exchange->add_option("--x-obs", exchange_x_obs, "observed statistics, comma separated")
        ->required();

    auto* evaluate = app.add_subcommand("evaluate", "run the stratified bias evaluation");
    add_common(evaluate, eval_opts);
    evaluate->add_option("--checkpoint", checkpoint, "checkpoint JSON")->required();

    auto* compare = app.add_subcommand("compare", "paired NPE vs exchange posterior means");
    add_common(compare, compare_opts);
    compare->add_option("--checkpoint", checkpoint, "checkpoint JSON")->required();

    app.add_subcommand("selftest", "run the small-n enumeration oracle suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            const ergm::RunConfig cfg = load_config(sim_opts);
            return ergm::cmd_simulate(cfg, resolve_out(sim_opts, cfg), std::cout);
        }
        if (train->parsed()) {
            const ergm::RunConfig cfg = load_config(train_opts);
            return ergm::cmd_train(cfg, train_mode, train_data, resolve_out(train_opts, cfg),
                                   std::cout);
        }
        if (sample->parsed()) {
            const ergm::RunConfig cfg = load_config(sample_opts);
            return ergm::cmd_sample(cfg, checkpoint, parse_vector(x_obs_text), sample_count,
                                    truncate || cfg.truncate_samples,
                                    resolve_out(sample_opts, cfg), std::cout);
        }
        if (exchange->parsed()) {
            const ergm::RunConfig cfg = load_config(exchange_opts);
            return ergm::cmd_exchange(cfg, parse_vector(exchange_x_obs),
                                      resolve_out(exchange_opts, cfg), std::cout);
        }
        if (evaluate->parsed()) {
            const ergm::RunConfig cfg = load_config(eval_opts);
            return ergm::cmd_evaluate(cfg, checkpoint, resolve_out(eval_opts, cfg), std::cout);
        }
        if (compare->parsed()) {
            const ergm::RunConfig cfg = load_config(compare_opts);
            return ergm::cmd_compare(cfg, checkpoint, resolve_out(compare_opts, cfg), std::cout);
        }
        return ergm::cmd_selftest(std::cout);
    } catch (const ergm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return ergm::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ergm::kExitConfigError;
    }
}
