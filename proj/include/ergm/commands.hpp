#pragma once

#include <string>
#include <vector>

#include "ergm/config.hpp"

namespace ergm {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;
inline constexpr int kExitOracleFailure = 4;

// Each command writes its outputs plus a manifest.json (config echo, config
// hash, tool version, output listing) into out_dir and returns an exit code.
// Diagnostics go to the provided stream.

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir, std::ostream& log);

// mode is "npe" or "snpe"; data_path optionally points at an existing
// TrainingSet CSV (otherwise the prior round is simulated here).
int cmd_train(const RunConfig& cfg, const std::string& mode, const std::string& data_path,
              const std::string& out_dir, std::ostream& log);

int cmd_sample(const RunConfig& cfg, const std::string& checkpoint_path,
               const StatsVector& x_obs, int count, bool truncate, const std::string& out_dir,
               std::ostream& log);

// Reference Bayesian fit: runs the exchange sampler on x_obs, writes the
// chain CSV, and prints the acceptance rate and posterior mean/sd summary.
int cmd_exchange(const RunConfig& cfg, const StatsVector& x_obs, const std::string& out_dir,
                 std::ostream& log);

int cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint_path,
                 const std::string& out_dir, std::ostream& log);

int cmd_compare(const RunConfig& cfg, const std::string& checkpoint_path,
                const std::string& out_dir, std::ostream& log);

// Runs the small-n enumeration oracle suite; returns kExitOracleFailure on
// any mismatch.
int cmd_selftest(std::ostream& log);

}  // namespace ergm
