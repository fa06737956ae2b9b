#include "ergm/config.hpp"

#include <set>

#include <json.hpp>

#include "ergm/io.hpp"

namespace ergm {

const char* const kToolVersion = "0.1.0";

namespace {

using nlohmann::ordered_json;

void reject_unknown(const ordered_json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError("unknown config key: " + where + item.key());
        }
    }
}

template <typename T>
void read_if(const ordered_json& obj, const char* key, T& target) {
    if (obj.contains(key)) target = obj.at(key).get<T>();
}

SpdMatrix read_cov(const ordered_json& obj, const std::string& where) {
    if (obj.contains("cov_diag") && obj.contains("cov")) {
        throw ConfigError(where + ": give either cov_diag or cov, not both");
    }
    if (obj.contains("cov_diag")) {
        return SpdMatrix::diagonal(obj.at("cov_diag").get<std::vector<double>>());
    }
    if (obj.contains("cov")) {
        const auto rows = obj.at("cov").get<std::vector<std::vector<double>>>();
        SpdMatrix m;
        m.dim = static_cast<int>(rows.size());
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != m.dim) {
                throw ConfigError(where + ": cov must be square");
            }
            m.m.insert(m.m.end(), row.begin(), row.end());
        }
        return m;
    }
    throw ConfigError(where + ": missing covariance");
}

}  // namespace

SimConfig RunConfig::make_sim_config() const {
    SimConfig sim;
    sim.n = n;
    sim.iterations = sim_iterations;
    sim.init = sim_init;
    sim.thin = sim_thin;
    sim.seed = seed;
    return sim;
}

NpeConfig RunConfig::make_npe_config() const {
    NpeConfig cfg = npe;
    cfg.flow = flow;
    cfg.seed = seed;
    cfg.workers = workers;
    return cfg;
}

SnpeConfig RunConfig::make_snpe_config() const {
    if (!snpe_x_obs) {
        throw ConfigError("snpe mode requires snpe.x_obs in the config");
    }
    SnpeConfig cfg;
    cfg.base = make_npe_config();
    cfg.rounds = snpe_rounds;
    cfg.per_round_B = snpe_per_round_B;
    cfg.atoms_per_batch = snpe_atoms_per_batch;
    cfg.x_obs = *snpe_x_obs;
    if (static_cast<int>(cfg.x_obs.size()) != stats.dim()) {
        throw ConfigError("snpe.x_obs dimension does not match stat_set");
    }
    return cfg;
}

TruthSamplerConfig RunConfig::make_truth_config() const {
    TruthSamplerConfig cfg;
    cfg.target_counts = strata_targets;
    cfg.box = search_box;
    cfg.pilot_sims = pilot_sims;
    cfg.attempt_budget = attempt_budget;
    cfg.seed = seed;
    return cfg;
}

std::string RunConfig::canonical_json() const {
    ordered_json j;
    j["seed"] = seed;
    j["workers"] = workers;
    j["output_dir"] = output_dir;
    std::vector<std::string> names;
    for (Stat s : stats.stat_set) names.emplace_back(stat_name(s));
    j["stats"] = {{"decay", stats.decay}, {"stat_set", names}};
    j["network"] = {{"n", n}};
    const char* init_name = sim_init == InitKind::empty ? "empty"
                            : sim_init == InitKind::full ? "full"
                                                         : "given";
    j["sim"] = {{"iterations", sim_iterations}, {"init", init_name}, {"thin", sim_thin}};
    j["prior"] = {{"mean", prior.mean}, {"cov", prior.covariance.m}};
    j["proposal"] = {{"cov", proposal.covariance.m}};
    j["flow"] = {{"num_transforms", flow.num_transforms},
                 {"hidden_units", flow.hidden_units},
                 {"hidden_layers", flow.hidden_layers},
                 {"alpha_clamp", flow.alpha_clamp}};
    j["npe"] = {{"B", npe.B},
                {"epochs", npe.epochs},
                {"batch_size", npe.batch_size},
                {"learning_rate", npe.learning_rate},
                {"validation_fraction", npe.validation_fraction},
                {"early_stop_patience", npe.early_stop_patience}};
    ordered_json snpe = {{"rounds", snpe_rounds},
                         {"per_round_B", snpe_per_round_B},
                         {"atoms_per_batch", snpe_atoms_per_batch}};
    if (snpe_x_obs) snpe["x_obs"] = *snpe_x_obs;
    j["snpe"] = snpe;
    ordered_json box = ordered_json::array();
    for (const auto& [lo, hi] : search_box.bounds) box.push_back({lo, hi});
    j["harness"] = {{"strata_targets", strata_targets},
                    {"search_box", box},
                    {"pilot_sims", pilot_sims},
                    {"attempt_budget", attempt_budget},
                    {"replicates", eval.replicates},
                    {"posterior_draws", eval.posterior_draws},
                    {"pred_per_replicate", eval.pred_per_replicate},
                    {"true_draws", eval.true_draws},
                    {"compare_replicates", compare_replicates},
                    {"compare_case", compare_case},
                    {"truncate", truncate_samples}};
    j["exchange"] = {{"chain_length", exchange.chain_length},
                     {"burn_in", exchange.burn_in},
                     {"reuse_aux", exchange.reuse_aux_graph}};
    return j.dump(2);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    try {
        RunConfig cfg;
        reject_unknown(j, {"seed", "workers", "output_dir", "stats", "network", "sim", "prior",
                           "proposal", "flow", "npe", "snpe", "harness", "exchange"},
                       "");
        read_if(j, "seed", cfg.seed);
        read_if(j, "workers", cfg.workers);
        read_if(j, "output_dir", cfg.output_dir);

        if (j.contains("stats")) {
            const auto& s = j.at("stats");
            reject_unknown(s, {"decay", "stat_set"}, "stats.");
            read_if(s, "decay", cfg.stats.decay);
            if (s.contains("stat_set")) {
                cfg.stats.stat_set.clear();
                for (const auto& name : s.at("stat_set")) {
                    cfg.stats.stat_set.push_back(stat_from_name(name.get<std::string>()));
                }
            }
        }
        cfg.stats.validate();
        const int p = cfg.stats.dim();

        if (j.contains("network")) {
            const auto& s = j.at("network");
            reject_unknown(s, {"n"}, "network.");
            read_if(s, "n", cfg.n);
            if (cfg.n < 2) throw ConfigError("network.n must be >= 2");
        }
        if (j.contains("sim")) {
            const auto& s = j.at("sim");
            reject_unknown(s, {"iterations", "init", "thin"}, "sim.");
            read_if(s, "iterations", cfg.sim_iterations);
            read_if(s, "thin", cfg.sim_thin);
            if (s.contains("init")) {
                const std::string init = s.at("init").get<std::string>();
                if (init == "empty") cfg.sim_init = InitKind::empty;
                else if (init == "full") cfg.sim_init = InitKind::full;
                else throw ConfigError("sim.init must be 'empty' or 'full'");
            }
        }

        if (j.contains("prior")) {
            const auto& s = j.at("prior");
            reject_unknown(s, {"mean", "cov_diag", "cov"}, "prior.");
            cfg.prior.mean = s.at("mean").get<std::vector<double>>();
            cfg.prior.covariance = read_cov(s, "prior");
        } else {
            cfg.prior = PriorSpec::normal(ThetaVector(p, 0.0), std::vector<double>(p, 10.0));
        }
        if (j.contains("proposal")) {
            const auto& s = j.at("proposal");
            reject_unknown(s, {"cov_diag", "cov"}, "proposal.");
            cfg.proposal.covariance = read_cov(s, "proposal");
        } else {
            cfg.proposal = ProposalSpec::isotropic(p, 0.1);
        }

        if (j.contains("flow")) {
            const auto& s = j.at("flow");
            reject_unknown(s, {"num_transforms", "hidden_units", "hidden_layers", "alpha_clamp"},
                           "flow.");
            read_if(s, "num_transforms", cfg.flow.num_transforms);
            read_if(s, "hidden_units", cfg.flow.hidden_units);
            read_if(s, "hidden_layers", cfg.flow.hidden_layers);
            read_if(s, "alpha_clamp", cfg.flow.alpha_clamp);
        }
        if (j.contains("npe")) {
            const auto& s = j.at("npe");
            reject_unknown(s, {"B", "epochs", "batch_size", "learning_rate",
                               "validation_fraction", "early_stop_patience"},
                           "npe.");
            read_if(s, "B", cfg.npe.B);
            read_if(s, "epochs", cfg.npe.epochs);
            read_if(s, "batch_size", cfg.npe.batch_size);
            read_if(s, "learning_rate", cfg.npe.learning_rate);
            read_if(s, "validation_fraction", cfg.npe.validation_fraction);
            read_if(s, "early_stop_patience", cfg.npe.early_stop_patience);
        }
        if (j.contains("snpe")) {
            const auto& s = j.at("snpe");
            reject_unknown(s, {"rounds", "per_round_B", "atoms_per_batch", "x_obs"}, "snpe.");
            read_if(s, "rounds", cfg.snpe_rounds);
            read_if(s, "per_round_B", cfg.snpe_per_round_B);
            read_if(s, "atoms_per_batch", cfg.snpe_atoms_per_batch);
            if (s.contains("x_obs")) {
                cfg.snpe_x_obs = s.at("x_obs").get<std::vector<double>>();
            }
        }
        if (j.contains("harness")) {
            const auto& s = j.at("harness");
            reject_unknown(s, {"strata_targets", "search_box", "pilot_sims", "attempt_budget",
                               "replicates", "posterior_draws", "pred_per_replicate",
                               "true_draws", "compare_replicates", "compare_case", "truncate"},
                           "harness.");
            if (s.contains("strata_targets")) {
                const auto targets = s.at("strata_targets").get<std::vector<int>>();
                if (targets.size() != 4) throw ConfigError("harness.strata_targets needs 4 entries");
                std::copy(targets.begin(), targets.end(), cfg.strata_targets.begin());
            }
            if (s.contains("search_box")) {
                cfg.search_box.bounds.clear();
                for (const auto& pair : s.at("search_box")) {
                    const auto bounds = pair.get<std::vector<double>>();
                    if (bounds.size() != 2 || bounds[0] > bounds[1]) {
                        throw ConfigError("harness.search_box entries must be [lo, hi]");
                    }
                    cfg.search_box.bounds.emplace_back(bounds[0], bounds[1]);
                }
            }
            read_if(s, "pilot_sims", cfg.pilot_sims);
            read_if(s, "attempt_budget", cfg.attempt_budget);
            read_if(s, "replicates", cfg.eval.replicates);
            read_if(s, "posterior_draws", cfg.eval.posterior_draws);
            read_if(s, "pred_per_replicate", cfg.eval.pred_per_replicate);
            read_if(s, "true_draws", cfg.eval.true_draws);
            read_if(s, "compare_replicates", cfg.compare_replicates);
            read_if(s, "compare_case", cfg.compare_case);
            read_if(s, "truncate", cfg.truncate_samples);
        }
        if (j.contains("exchange")) {
            const auto& s = j.at("exchange");
            reject_unknown(s, {"chain_length", "burn_in", "reuse_aux"}, "exchange.");
            read_if(s, "chain_length", cfg.exchange.chain_length);
            read_if(s, "burn_in", cfg.exchange.burn_in);
            read_if(s, "reuse_aux", cfg.exchange.reuse_aux_graph);
        }

        // Cross-field consistency.
        if (static_cast<int>(cfg.prior.mean.size()) != p || cfg.prior.covariance.dim != p) {
            throw ConfigError("prior dimensions must match stat_set");
        }
        cfg.prior.validate();
        if (cfg.proposal.covariance.dim != p) {
            throw ConfigError("proposal dimensions must match stat_set");
        }
        cholesky(cfg.proposal.covariance);
        if (cfg.search_box.bounds.empty()) {
            // Declared default: edge parameter explores sparse graphs, GW
            // parameters stay moderate.
            cfg.search_box.bounds.assign(static_cast<std::size_t>(p), {-1.0, 1.0});
            cfg.search_box.bounds[0] = {-4.0, 0.0};
        }
        if (static_cast<int>(cfg.search_box.bounds.size()) != p) {
            throw ConfigError("harness.search_box dimension must match stat_set");
        }
        if (cfg.snpe_x_obs && static_cast<int>(cfg.snpe_x_obs->size()) != p) {
            throw ConfigError("snpe.x_obs dimension must match stat_set");
        }
        cfg.eval.seed = cfg.seed;
        cfg.eval.workers = cfg.workers;
        cfg.exchange.seed = cfg.seed;
        return cfg;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
}

RunConfig RunConfig::from_file(const std::string& path) {
    return from_json_text(read_text_file(path));
}

RunConfig RunConfig::from_file_with_overrides(const std::string& path,
                                              const std::vector<std::string>& overrides) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_text_file(path));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    for (const std::string& entry : overrides) {
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override must look like section.key=value: " + entry);
        }
        std::string pointer = "/" + entry.substr(0, eq);
        for (char& c : pointer) {
            if (c == '.') c = '/';
        }
        ordered_json value;
        try {
            value = ordered_json::parse(entry.substr(eq + 1));
        } catch (const std::exception&) {
            value = entry.substr(eq + 1);  // bare strings stay strings
        }
        j[ordered_json::json_pointer(pointer)] = value;
    }
    return from_json_text(j.dump());
}

}  // namespace ergm
