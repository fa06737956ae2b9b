#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ergm/exchange.hpp"
#include "ergm/graph.hpp"
#include "ergm/harness.hpp"
#include "ergm/sim.hpp"

namespace ergm {

// Graph text fixtures: first line "n <count>", then one "i j" edge per line,
// 0-indexed with i < j.
std::string graph_to_text(const Graph& g);
Graph graph_from_text(const std::string& text);
void write_graph_file(const std::string& path, const Graph& g);
Graph read_graph_file(const std::string& path);

// Doubles are printed with %.17g so files round-trip bit exactly.
std::string format_double(double v);

// TrainingSet CSV: header "theta_1..theta_p,x_1..x_p,round".
std::string training_set_to_csv(const TrainingSet& data);
TrainingSet training_set_from_csv(const std::string& text);
void write_training_set(const std::string& path, const TrainingSet& data);
TrainingSet read_training_set(const std::string& path);

// Chain CSV: "step,theta_1..theta_p,accepted" (step 0 = initial draw).
std::string chain_to_csv(const PosteriorChain& chain);
void write_chain(const std::string& path, const PosteriorChain& chain);

// Posterior sample CSV: "theta_1..theta_p".
std::string samples_to_csv(const std::vector<ThetaVector>& samples);
void write_samples(const std::string& path, const std::vector<ThetaVector>& samples);

// Bias/magnitude report CSVs (per-coordinate columns in stat_set order).
std::string bias_report_to_csv(const BiasReport& report, const StatsConfig& stats);
std::string magnitude_report_to_csv(const MagnitudeReport& report, const StatsConfig& stats);
std::string compare_pairs_to_csv(const ComparePairs& pairs, const StatsConfig& stats);
// Long format (method, coordinate, value) for density/contour plotting.
std::string compare_pairs_to_long_csv(const ComparePairs& pairs, const StatsConfig& stats);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// FNV-1a hash of a canonical string; manifests record it for reproducibility.
std::uint64_t fnv1a(const std::string& text);

}  // namespace ergm
