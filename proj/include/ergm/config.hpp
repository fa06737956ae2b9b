#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

#include "ergm/exchange.hpp"
#include "ergm/flow/maf.hpp"
#include "ergm/harness.hpp"
#include "ergm/mvn.hpp"
#include "ergm/npe.hpp"
#include "ergm/sim.hpp"

namespace ergm {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Whole-run configuration document. Parsed from a single JSON file; unknown
// keys are rejected and every dimension is cross-checked against stat_set.
struct RunConfig {
    std::uint64_t seed = 1;
    int workers = 0;  // 0 = all available cores
    std::string output_dir = "out";

    StatsConfig stats;
    int n = 16;
    std::int64_t sim_iterations = 5000;
    InitKind sim_init = InitKind::empty;
    std::int64_t sim_thin = 1;

    PriorSpec prior;        // defaults to N(0, 10 I)
    ProposalSpec proposal;  // defaults to 0.1^2 I

    flow::MafConfig flow;
    NpeConfig npe;

    int snpe_rounds = 8;
    int snpe_per_round_B = 1000;
    int snpe_atoms_per_batch = 10;
    std::optional<StatsVector> snpe_x_obs;

    std::array<int, 4> strata_targets = {2, 2, 2, 2};
    SearchBox search_box;
    int pilot_sims = 20;
    int attempt_budget = 20000;
    BiasEvalSettings eval;
    int compare_replicates = 20;
    int compare_case = 0;
    bool truncate_samples = false;

    ExchangeConfig exchange;

    SimConfig make_sim_config() const;
    NpeConfig make_npe_config() const;
    SnpeConfig make_snpe_config() const;  // throws ConfigError if x_obs missing
    TruthSamplerConfig make_truth_config() const;

    // Canonical JSON echo used for manifests and config hashing.
    std::string canonical_json() const;

    static RunConfig from_json_text(const std::string& text);
    static RunConfig from_file(const std::string& path);

    // Applies "section.key=value" overrides on the JSON document level.
    static RunConfig from_file_with_overrides(const std::string& path,
                                              const std::vector<std::string>& overrides);
};

extern const char* const kToolVersion;

}  // namespace ergm
