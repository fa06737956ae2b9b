#pragma once

#include <string>

#include "ergm/flow/maf.hpp"
#include "ergm/graph.hpp"

namespace ergm::flow {

// Checkpoints are a single JSON document:
//   {format_version, stat_set, decay, standardizer, architecture
//    {p, context_dim, num_transforms, hidden_units, hidden_layers},
//    parameters: flat arrays per layer with declared shapes, rng_seed}
// Doubles survive the round trip bit-exactly (shortest round-trip decimal);
// masks and permutations are rebuilt from rng_seed and the architecture.

struct Checkpoint {
    StatsConfig stats;
    MafModel model;
};

std::string checkpoint_to_json(const MafModel& model, const StatsConfig& stats);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::string& path, const MafModel& model, const StatsConfig& stats);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ergm::flow
