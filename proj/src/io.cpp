#include "ergm/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ergm {

std::string graph_to_text(const Graph& g) {
    std::ostringstream out;
    out << "n " << g.vertex_count() << "\n";
    g.for_each_edge([&](int i, int j) { out << i << " " << j << "\n"; });
    return out.str();
}

Graph graph_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    int n = 0;
    if (!(in >> tag >> n) || tag != "n") {
        throw std::invalid_argument("graph text: expected 'n <count>' header");
    }
    Graph g(n);
    int i = 0;
    int j = 0;
    while (in >> i >> j) {
        if (i >= j) throw std::invalid_argument("graph text: edges must satisfy i < j");
        g.toggle(i, j);
    }
    return g;
}

void write_graph_file(const std::string& path, const Graph& g) {
    write_text_file(path, graph_to_text(g));
}

Graph read_graph_file(const std::string& path) { return graph_from_text(read_text_file(path)); }

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void append_header(std::ostringstream& out, const char* prefix, int dim, bool leading_comma) {
    for (int k = 0; k < dim; ++k) {
        if (leading_comma || k > 0) out << ",";
        out << prefix << "_" << (k + 1);
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

std::string training_set_to_csv(const TrainingSet& data) {
    std::ostringstream out;
    append_header(out, "theta", data.theta_dim, false);
    append_header(out, "x", data.x_dim, true);
    out << ",round\n";
    for (std::size_t b = 0; b < data.size(); ++b) {
        const auto theta = data.theta_row(b);
        const auto x = data.x_row(b);
        for (int k = 0; k < data.theta_dim; ++k) {
            if (k > 0) out << ",";
            out << format_double(theta[k]);
        }
        for (int k = 0; k < data.x_dim; ++k) out << "," << format_double(x[k]);
        out << "," << data.rounds[b] << "\n";
    }
    return out.str();
}

TrainingSet training_set_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("training CSV: missing header");
    const auto header = split_csv_line(line);
    int theta_dim = 0;
    int x_dim = 0;
    for (const std::string& name : header) {
        if (name.rfind("theta_", 0) == 0) ++theta_dim;
        else if (name.rfind("x_", 0) == 0) ++x_dim;
        else if (name != "round") throw std::invalid_argument("training CSV: unknown column " + name);
    }
    if (theta_dim == 0 || x_dim == 0 || header.back() != "round") {
        throw std::invalid_argument("training CSV: bad header layout");
    }
    TrainingSet data;
    data.theta_dim = theta_dim;
    data.x_dim = x_dim;
    std::vector<double> theta(theta_dim), x(x_dim);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != theta_dim + x_dim + 1) {
            throw std::invalid_argument("training CSV: bad row width");
        }
        for (int k = 0; k < theta_dim; ++k) theta[k] = std::stod(fields[k]);
        for (int k = 0; k < x_dim; ++k) x[k] = std::stod(fields[theta_dim + k]);
        data.push(theta, x, std::stoi(fields.back()));
    }
    return data;
}

void write_training_set(const std::string& path, const TrainingSet& data) {
    write_text_file(path, training_set_to_csv(data));
}

TrainingSet read_training_set(const std::string& path) {
    return training_set_from_csv(read_text_file(path));
}

std::string chain_to_csv(const PosteriorChain& chain) {
    std::ostringstream out;
    const int dim = chain.samples.empty() ? 0 : static_cast<int>(chain.samples[0].size());
    out << "step";
    append_header(out, "theta", dim, true);
    out << ",accepted\n";
    for (std::size_t t = 0; t < chain.samples.size(); ++t) {
        out << t;
        for (int k = 0; k < dim; ++k) out << "," << format_double(chain.samples[t][k]);
        out << "," << (t == 0 ? 1 : static_cast<int>(chain.accepted[t - 1])) << "\n";
    }
    return out.str();
}

void write_chain(const std::string& path, const PosteriorChain& chain) {
    write_text_file(path, chain_to_csv(chain));
}

std::string samples_to_csv(const std::vector<ThetaVector>& samples) {
    std::ostringstream out;
    const int dim = samples.empty() ? 0 : static_cast<int>(samples[0].size());
    append_header(out, "theta", dim, false);
    out << "\n";
    for (const ThetaVector& draw : samples) {
        for (int k = 0; k < dim; ++k) {
            if (k > 0) out << ",";
            out << format_double(draw[k]);
        }
        out << "\n";
    }
    return out.str();
}

void write_samples(const std::string& path, const std::vector<ThetaVector>& samples) {
    write_text_file(path, samples_to_csv(samples));
}

std::string bias_report_to_csv(const BiasReport& report, const StatsConfig& stats) {
    std::ostringstream out;
    out << "metric";
    for (Stat s : stats.stat_set) out << "," << stat_name(s);
    out << "\n";
    auto row = [&](const char* name, const std::vector<double>& values) {
        out << name;
        for (double v : values) out << "," << format_double(v);
        out << "\n";
    };
    row("ME", report.me);
    row("MAE", report.mae);
    row("RMSE", report.rmse);
    return out.str();
}

std::string magnitude_report_to_csv(const MagnitudeReport& report, const StatsConfig& stats) {
    std::ostringstream out;
    out << "case";
    for (Stat s : stats.stat_set) out << "," << stat_name(s) << "_bias";
    for (Stat s : stats.stat_set) out << "," << stat_name(s) << "_coverage_pct";
    out << "\n";
    for (std::size_t c = 0; c < report.cases.size(); ++c) {
        out << c;
        for (auto flag : report.cases[c].small_bias) out << "," << (flag ? "small" : "large");
        for (double pct : report.cases[c].coverage_pct) out << "," << format_double(pct);
        out << "\n";
    }
    return out.str();
}

std::string compare_pairs_to_csv(const ComparePairs& pairs, const StatsConfig& stats) {
    std::ostringstream out;
    out << "replicate,method";
    for (Stat s : stats.stat_set) out << ",theta_" << stat_name(s);
    out << "\n";
    auto rows = [&](const std::vector<ThetaVector>& means, const char* method) {
        for (std::size_t m = 0; m < means.size(); ++m) {
            out << m << "," << method;
            for (double v : means[m]) out << "," << format_double(v);
            out << "\n";
        }
    };
    rows(pairs.npe_means, "npe");
    rows(pairs.exchange_means, "exchange");
    return out.str();
}

std::string compare_pairs_to_long_csv(const ComparePairs& pairs, const StatsConfig& stats) {
    std::ostringstream out;
    out << "method,coordinate,value\n";
    auto rows = [&](const std::vector<ThetaVector>& means, const char* method) {
        for (const ThetaVector& mean : means) {
            for (std::size_t k = 0; k < mean.size(); ++k) {
                out << method << "," << stat_name(stats.stat_set[k]) << ","
                    << format_double(mean[k]) << "\n";
            }
        }
    };
    rows(pairs.npe_means, "npe");
    rows(pairs.exchange_means, "exchange");
    return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

}  // namespace ergm
