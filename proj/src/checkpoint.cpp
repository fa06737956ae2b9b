#include "ergm/flow/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace ergm::flow {

namespace {

using nlohmann::ordered_json;

ordered_json layer_json(const std::string& name, const MaskedLayer& layer) {
    ordered_json j;
    j["name"] = name;
    j["shape"] = {layer.out_dim, layer.in_dim};
    j["w"] = layer.w;
    j["b"] = layer.b;
    return j;
}

void load_layer(const ordered_json& j, MaskedLayer& layer) {
    const auto shape = j.at("shape");
    if (shape.at(0).get<int>() != layer.out_dim || shape.at(1).get<int>() != layer.in_dim) {
        throw std::invalid_argument("checkpoint: layer shape mismatch for " +
                                    j.at("name").get<std::string>());
    }
    const auto w = j.at("w").get<std::vector<double>>();
    const auto b = j.at("b").get<std::vector<double>>();
    if (w.size() != layer.w.size() || b.size() != layer.b.size()) {
        throw std::invalid_argument("checkpoint: layer size mismatch");
    }
    layer.w = w;
    layer.b = b;
}

}  // namespace

std::string checkpoint_to_json(const MafModel& model, const StatsConfig& stats) {
    ordered_json j;
    j["format_version"] = 1;
    std::vector<std::string> names;
    for (Stat s : stats.stat_set) names.emplace_back(stat_name(s));
    j["stat_set"] = names;
    j["decay"] = stats.decay;
    j["standardizer"] = {{"theta_mean", model.standardizer.theta_mean},
                         {"theta_sd", model.standardizer.theta_sd},
                         {"x_mean", model.standardizer.x_mean},
                         {"x_sd", model.standardizer.x_sd}};
    j["architecture"] = {{"p", model.p},
                         {"context_dim", model.context_dim},
                         {"num_transforms", model.cfg.num_transforms},
                         {"hidden_units", model.cfg.hidden_units},
                         {"hidden_layers", model.cfg.hidden_layers}};
    j["alpha_clamp"] = model.cfg.alpha_clamp;

    ordered_json params = ordered_json::array();
    for (std::size_t t = 0; t < model.nets.size(); ++t) {
        const std::string prefix = "t" + std::to_string(t) + ".";
        const MadeNet& net = model.nets[t];
        for (std::size_t l = 0; l < net.hidden.size(); ++l) {
            params.push_back(layer_json(prefix + "hidden" + std::to_string(l), net.hidden[l]));
        }
        params.push_back(layer_json(prefix + "mu", net.out_mu));
        params.push_back(layer_json(prefix + "alpha", net.out_alpha));
    }
    j["parameters"] = std::move(params);
    j["rng_seed"] = model.init_seed;
    return j.dump(2);
}

Checkpoint checkpoint_from_json(const std::string& text) {
    const ordered_json j = ordered_json::parse(text);
    if (j.at("format_version").get<int>() != 1) {
        throw std::invalid_argument("checkpoint: unsupported format_version");
    }
    Checkpoint ck;
    ck.stats.decay = j.at("decay").get<double>();
    ck.stats.stat_set.clear();
    for (const auto& name : j.at("stat_set")) {
        ck.stats.stat_set.push_back(stat_from_name(name.get<std::string>()));
    }
    ck.stats.validate();

    const auto arch = j.at("architecture");
    MafConfig cfg;
    cfg.num_transforms = arch.at("num_transforms").get<int>();
    cfg.hidden_units = arch.at("hidden_units").get<int>();
    cfg.hidden_layers = arch.at("hidden_layers").get<int>();
    cfg.alpha_clamp = j.at("alpha_clamp").get<double>();
    const int p = arch.at("p").get<int>();
    const int context_dim = arch.at("context_dim").get<int>();
    const std::uint64_t seed = j.at("rng_seed").get<std::uint64_t>();

    ck.model = make_maf(p, context_dim, cfg, seed, WeightInit::identity);
    const auto std_json = j.at("standardizer");
    ck.model.standardizer.theta_mean = std_json.at("theta_mean").get<std::vector<double>>();
    ck.model.standardizer.theta_sd = std_json.at("theta_sd").get<std::vector<double>>();
    ck.model.standardizer.x_mean = std_json.at("x_mean").get<std::vector<double>>();
    ck.model.standardizer.x_sd = std_json.at("x_sd").get<std::vector<double>>();

    const auto& params = j.at("parameters");
    std::size_t idx = 0;
    auto next = [&]() -> const ordered_json& {
        if (idx >= params.size()) throw std::invalid_argument("checkpoint: missing parameters");
        return params[idx++];
    };
    for (auto& net : ck.model.nets) {
        for (auto& layer : net.hidden) load_layer(next(), layer);
        load_layer(next(), net.out_mu);
        load_layer(next(), net.out_alpha);
    }
    if (idx != params.size()) {
        throw std::invalid_argument("checkpoint: trailing parameter entries");
    }
    return ck;
}

void save_checkpoint(const std::string& path, const MafModel& model, const StatsConfig& stats) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << checkpoint_to_json(model, stats) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return checkpoint_from_json(text);
}

}  // namespace ergm::flow
