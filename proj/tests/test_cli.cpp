#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ergm/commands.hpp"
#include "ergm/flow/checkpoint.hpp"
#include "ergm/io.hpp"
#include "ergm/npe.hpp"

using namespace ergm;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ergm_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

const char* kTinyConfig = R"({
  "seed": 7,
  "workers": 1,
  "stats": {"decay": 0.75, "stat_set": ["edges"]},
  "network": {"n": 4},
  "sim": {"iterations": 120},
  "prior": {"mean": [0.0], "cov_diag": [1.0]},
  "proposal": {"cov_diag": [0.25]},
  "flow": {"num_transforms": 2, "hidden_units": 8, "hidden_layers": 1},
  "npe": {"B": 200, "epochs": 3, "batch_size": 50, "learning_rate": 0.001,
           "validation_fraction": 0.1, "early_stop_patience": 2},
  "snpe": {"rounds": 1, "per_round_B": 200, "atoms_per_batch": 8, "x_obs": [3.0]},
  "harness": {"strata_targets": [1, 0, 0, 0], "search_box": [[-2.0, 0.0]],
               "pilot_sims": 5, "attempt_budget": 200, "replicates": 3,
               "posterior_draws": 500, "pred_per_replicate": 5, "true_draws": 50,
               "compare_replicates": 3},
  "exchange": {"chain_length": 300, "burn_in": 50}
})";

}  // namespace

TEST_CASE("config parsing: defaults, overrides, and unknown keys") {
    const RunConfig cfg = RunConfig::from_json_text(kTinyConfig);
    CHECK(cfg.seed == 7);
    CHECK(cfg.stats.dim() == 1);
    CHECK(cfg.npe.B == 200);

    CHECK_THROWS_AS(RunConfig::from_json_text("{\"bogus\": 1}"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text("{\"npe\": {\"nope\": 1}}"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text("not json"), ConfigError);
    // Dimension mismatches are config errors.
    CHECK_THROWS_AS(RunConfig::from_json_text(
                        "{\"stats\": {\"stat_set\": [\"edges\"]}, "
                        "\"prior\": {\"mean\": [0, 0], \"cov_diag\": [1, 1]}}"),
                    ConfigError);

    // Defaults: N(0, 10 I) prior over the full stat set.
    const RunConfig defaults = RunConfig::from_json_text("{}");
    CHECK(defaults.stats.dim() == 3);
    CHECK(defaults.prior.covariance(0, 0) == 10.0);
    CHECK(defaults.prior.covariance(0, 1) == 0.0);
}

TEST_CASE("cmd_simulate writes deterministic CSV plus a manifest") {
    const RunConfig cfg = RunConfig::from_json_text(kTinyConfig);
    std::ostringstream log;

    const std::string dir1 = fresh_dir("sim1");
    REQUIRE(cmd_simulate(cfg, dir1, log) == kExitOk);
    const std::string csv1 = read_text_file(dir1 + "/train.csv");
    CHECK(std::count(csv1.begin(), csv1.end(), '\n') == 201);  // header + B rows
    CHECK(fs::exists(dir1 + "/manifest.json"));

    // Re-running with the same inputs reproduces the bytes.
    const std::string dir2 = fresh_dir("sim2");
    REQUIRE(cmd_simulate(cfg, dir2, log) == kExitOk);
    CHECK(read_text_file(dir2 + "/train.csv") == csv1);
    CHECK(read_text_file(dir2 + "/manifest.json") == read_text_file(dir1 + "/manifest.json"));

    // B = 0: header-only CSV.
    RunConfig zero = cfg;
    zero.npe.B = 0;
    const std::string dir3 = fresh_dir("sim0");
    REQUIRE(cmd_simulate(zero, dir3, log) == kExitOk);
    CHECK(read_text_file(dir3 + "/train.csv") == "theta_1,x_1,round\n");
}

TEST_CASE("cmd_train: npe and single-round snpe produce identical checkpoints") {
    const RunConfig cfg = RunConfig::from_json_text(kTinyConfig);
    std::ostringstream log;

    const std::string npe_dir = fresh_dir("train_npe");
    REQUIRE(cmd_train(cfg, "npe", "", npe_dir, log) == kExitOk);
    REQUIRE(fs::exists(npe_dir + "/checkpoint.json"));

    const std::string snpe_dir = fresh_dir("train_snpe");
    REQUIRE(cmd_train(cfg, "snpe", "", snpe_dir, log) == kExitOk);
    CHECK(read_text_file(npe_dir + "/checkpoint.json") ==
          read_text_file(snpe_dir + "/checkpoint.json"));

    // Checkpoints round-trip with identical log_prob on probe points.
    const flow::Checkpoint ck = flow::load_checkpoint(npe_dir + "/checkpoint.json");
    const std::string rt = fresh_dir("train_rt") + "/ck.json";
    flow::save_checkpoint(rt, ck.model, ck.stats);
    const flow::Checkpoint ck2 = flow::load_checkpoint(rt);
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const ThetaVector theta = {rng.normal()};
        const StatsVector x = {3.0 * rng.uniform()};
        CHECK(std::abs(flow::maf_log_prob(ck.model, theta, x) -
                       flow::maf_log_prob(ck2.model, theta, x)) <= 1e-12);
    }

    // Bad mode and missing x_obs are config errors.
    CHECK(cmd_train(cfg, "bogus", "", fresh_dir("train_bad"), log) == kExitConfigError);
    RunConfig no_obs = cfg;
    no_obs.snpe_x_obs.reset();
    CHECK(cmd_train(no_obs, "snpe", "", fresh_dir("train_noobs"), log) == kExitConfigError);
}

TEST_CASE("cmd_train accepts a pre-simulated dataset") {
    const RunConfig cfg = RunConfig::from_json_text(kTinyConfig);
    std::ostringstream log;
    const std::string sim_dir = fresh_dir("data_for_train");
    REQUIRE(cmd_simulate(cfg, sim_dir, log) == kExitOk);
    const std::string train_dir = fresh_dir("train_from_csv");
    REQUIRE(cmd_train(cfg, "npe", sim_dir + "/train.csv", train_dir, log) == kExitOk);
    // Same data and seeds as the self-simulated path: identical checkpoint.
    const std::string direct_dir = fresh_dir("train_direct");
    REQUIRE(cmd_train(cfg, "npe", "", direct_dir, log) == kExitOk);
    CHECK(read_text_file(train_dir + "/checkpoint.json") ==
          read_text_file(direct_dir + "/checkpoint.json"));
}

TEST_CASE("cmd_sample: reproducibility, count, and leakage exit code") {
    const RunConfig cfg = RunConfig::from_json_text(kTinyConfig);
    std::ostringstream log;
    const std::string train_dir = fresh_dir("sample_train");
    REQUIRE(cmd_train(cfg, "npe", "", train_dir, log) == kExitOk);
    const std::string ck = train_dir + "/checkpoint.json";

    const std::string one = fresh_dir("sample_one");
    REQUIRE(cmd_sample(cfg, ck, {3.0}, 1, false, one, log) == kExitOk);
    const std::string one_csv = read_text_file(one + "/samples.csv");
    CHECK(std::count(one_csv.begin(), one_csv.end(), '\n') == 2);  // header + 1 row

    const std::string s1 = fresh_dir("sample_a");
    const std::string s2 = fresh_dir("sample_b");
    REQUIRE(cmd_sample(cfg, ck, {3.0}, 200, false, s1, log) == kExitOk);
    REQUIRE(cmd_sample(cfg, ck, {3.0}, 200, false, s2, log) == kExitOk);
    CHECK(read_text_file(s1 + "/samples.csv") == read_text_file(s2 + "/samples.csv"));

    // Dimension mismatch is a config error.
    CHECK(cmd_sample(cfg, ck, {3.0, 1.0}, 10, false, fresh_dir("sample_bad"), log) ==
          kExitConfigError);

    // A checkpoint centred far outside the prior box trips the leakage exit.
    flow::Checkpoint shifted = flow::load_checkpoint(ck);
    shifted.model.standardizer.theta_mean = {500.0};
    const std::string shifted_dir = fresh_dir("sample_shifted");
    const std::string shifted_ck = shifted_dir + "/ck.json";
    flow::save_checkpoint(shifted_ck, shifted.model, shifted.stats);
    CHECK(cmd_sample(cfg, shifted_ck, {3.0}, 50, true, shifted_dir, log) == kExitNumericalError);
}

TEST_CASE("cmd_evaluate and cmd_compare produce reports") {
    const RunConfig cfg = RunConfig::from_json_text(kTinyConfig);
    std::ostringstream log;
    const std::string train_dir = fresh_dir("eval_train");
    REQUIRE(cmd_train(cfg, "npe", "", train_dir, log) == kExitOk);
    const std::string ck = train_dir + "/checkpoint.json";

    const std::string eval_dir = fresh_dir("eval_out");
    REQUIRE(cmd_evaluate(cfg, ck, eval_dir, log) == kExitOk);
    CHECK(fs::exists(eval_dir + "/bias_report.csv"));
    CHECK(fs::exists(eval_dir + "/magnitude_report.csv"));
    CHECK(fs::exists(eval_dir + "/summary.json"));

    // Zero cases requested: an empty report is a config error.
    RunConfig none = cfg;
    none.strata_targets = {0, 0, 0, 0};
    CHECK(cmd_evaluate(none, ck, fresh_dir("eval_none"), log) == kExitConfigError);

    const std::string cmp_dir = fresh_dir("cmp_out");
    REQUIRE(cmd_compare(cfg, ck, cmp_dir, log) == kExitOk);
    const std::string pairs = read_text_file(cmp_dir + "/compare_pairs.csv");
    CHECK(std::count(pairs.begin(), pairs.end(), '\n') == 1 + 2 * 3);  // header + 2M rows

    // Re-running either report command reproduces its outputs byte for byte.
    const std::string eval_dir2 = fresh_dir("eval_out2");
    REQUIRE(cmd_evaluate(cfg, ck, eval_dir2, log) == kExitOk);
    CHECK(read_text_file(eval_dir2 + "/bias_report.csv") ==
          read_text_file(eval_dir + "/bias_report.csv"));
    CHECK(read_text_file(eval_dir2 + "/magnitude_report.csv") ==
          read_text_file(eval_dir + "/magnitude_report.csv"));
    const std::string cmp_dir2 = fresh_dir("cmp_out2");
    REQUIRE(cmd_compare(cfg, ck, cmp_dir2, log) == kExitOk);
    CHECK(read_text_file(cmp_dir2 + "/compare_pairs.csv") == pairs);
}

TEST_CASE("cmd_exchange writes a chain and prints the summary") {
    const RunConfig cfg = RunConfig::from_json_text(kTinyConfig);
    std::ostringstream log;
    const std::string dir = fresh_dir("exchange_out");
    REQUIRE(cmd_exchange(cfg, {3.0}, dir, log) == kExitOk);
    const std::string chain = read_text_file(dir + "/chain.csv");
    CHECK(chain.rfind("step,theta_1,accepted\n", 0) == 0);
    // header + initial draw + chain_length steps
    CHECK(std::count(chain.begin(), chain.end(), '\n') == 1 + 1 + 300);
    CHECK(log.str().find("acceptance rate") != std::string::npos);
    CHECK(log.str().find("posterior mean") != std::string::npos);

    CHECK(cmd_exchange(cfg, {3.0, 1.0}, fresh_dir("exchange_bad"), log) == kExitConfigError);
}

TEST_CASE("selftest passes against the enumeration oracles") {
    std::ostringstream log;
    CHECK(cmd_selftest(log) == kExitOk);
    CHECK(log.str().find("FAIL") == std::string::npos);
}
