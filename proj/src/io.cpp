#include "kcdisc/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace kcdisc {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

DatasetPaths dataset_paths(const std::string& prefix) {
    return {prefix + ".csv", prefix + ".meta.json", prefix + ".truth.json"};
}

std::string meta_path_for(const std::string& csv_path) {
    const std::string ext = ".csv";
    if (csv_path.size() > ext.size() && csv_path.compare(csv_path.size() - ext.size(), ext.size(), ext) == 0) {
        return csv_path.substr(0, csv_path.size() - ext.size()) + ".meta.json";
    }
    return csv_path + ".meta.json";
}

std::vector<std::string> variable_names(const Dataset& data) {
    std::vector<std::string> names;
    for (const auto& v : data.variables()) names.push_back(v.name);
    return names;
}

namespace {

std::vector<std::string> column_names(const std::vector<Variable>& vars) {
    std::vector<std::string> cols;
    for (const auto& v : vars) {
        for (int k = 0; k < v.dim; ++k) cols.push_back(v.name + "." + std::to_string(k));
    }
    return cols;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& s, int row, int col) {
    double x = 0.0;
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, x);
    if (res.ec != std::errc() || res.ptr != end) {
        throw IoError("bad number '" + s + "' at data row " + std::to_string(row + 1) + ", column " +
                      std::to_string(col + 1));
    }
    return x;
}

int node_index(const std::vector<std::string>& nodes, const Json& name) {
    if (!name.is_string()) throw IoError("graph edge endpoints must be node names");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] == name.get<std::string>()) return static_cast<int>(i);
    }
    throw IoError("edge references unknown node '" + name.get<std::string>() + "'");
}

}  // namespace

std::string dataset_to_csv(const Dataset& data) {
    std::string out;
    const auto cols = column_names(data.variables());
    for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "," : "") + cols[c];
    out += '\n';
    const auto& x = data.values();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            if (c) out += ',';
            out += format_double(x(i, c));
        }
        out += '\n';
    }
    return out;
}

Json dataset_meta_json(const Dataset& data) {
    Json vars = Json::array();
    for (const auto& v : data.variables()) {
        Json j{{"name", v.name}, {"dim", v.dim}, {"type", v.type == VarType::discrete ? "discrete" : "continuous"}};
        if (v.type == VarType::discrete) j["range"] = {v.range_lo, v.range_hi};
        vars.push_back(std::move(j));
    }
    return Json{{"n", data.num_samples()}, {"variables", std::move(vars)}};
}

Dataset dataset_from_csv(const std::string& csv_text, const Json& meta) {
    std::vector<Variable> vars;
    try {
        for (const auto& j : meta.at("variables")) {
            Variable v;
            v.name = j.at("name").get<std::string>();
            v.dim = j.value("dim", 1);
            const auto type = j.value("type", std::string("continuous"));
            if (type == "discrete") {
                v.type = VarType::discrete;
                v.range_lo = j.at("range").at(0).get<int>();
                v.range_hi = j.at("range").at(1).get<int>();
            } else if (type != "continuous") {
                throw IoError("variable '" + v.name + "' has unknown type '" + type + "'");
            }
            vars.push_back(std::move(v));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed dataset metadata: ") + e.what());
    }
    const auto expected = column_names(vars);

    std::istringstream is(csv_text);
    std::string line;
    if (!std::getline(is, line)) throw IoError("dataset CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line, ',');
    if (header != expected) throw IoError("CSV header does not match the metadata columns");

    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != expected.size()) {
            throw IoError("data row " + std::to_string(rows.size() + 1) + " has " + std::to_string(cells.size()) +
                          " fields, expected " + std::to_string(expected.size()));
        }
        std::vector<double> row;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            row.push_back(parse_double(cells[c], static_cast<int>(rows.size()), static_cast<int>(c)));
        }
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(expected.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < expected.size(); ++c) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
        }
    }
    return Dataset(std::move(x), std::move(vars));
}

Dataset read_dataset(const std::string& csv_path, const std::string& meta_path) {
    return dataset_from_csv(read_text(csv_path), read_json(meta_path));
}

Json graph_json(const Pdag& g, const std::vector<std::string>& names) {
    if (static_cast<int>(names.size()) != g.size()) throw IoError("node name count does not match the graph");
    Json directed = Json::array();
    for (const auto& [a, b] : g.directed_edges()) directed.push_back({names[a], names[b]});
    Json undirected = Json::array();
    for (const auto& [a, b] : g.undirected_edges()) undirected.push_back({names[a], names[b]});
    return Json{{"nodes", names}, {"directed", std::move(directed)}, {"undirected", std::move(undirected)}};
}

NamedGraph graph_from_json(const Json& j) {
    NamedGraph out;
    try {
        out.nodes = j.at("nodes").get<std::vector<std::string>>();
        out.graph = Pdag(static_cast<int>(out.nodes.size()));
        for (const auto& e : j.at("directed")) {
            out.graph.add_directed(node_index(out.nodes, e.at(0)), node_index(out.nodes, e.at(1)));
        }
        for (const auto& e : j.value("undirected", Json::array())) {
            out.graph.add_undirected(node_index(out.nodes, e.at(0)), node_index(out.nodes, e.at(1)));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed graph JSON: ") + e.what());
    } catch (const GraphError& e) {
        throw IoError(std::string("invalid graph: ") + e.what());
    }
    return out;
}

namespace {

Json transform_json(const Transform& t) {
    Json j{{"kind", to_string(t.kind)}};
    if (t.kind == FnKind::linear) j["weight"] = t.param;
    if (t.kind == FnKind::power) j["alpha"] = t.param;
    return j;
}

Json noise_json(const NoiseSpec& s) {
    if (s.kind == NoiseKind::gaussian) return Json{{"kind", "gaussian"}, {"std", s.scale}};
    return Json{{"kind", "uniform"}, {"low", -s.scale}, {"high", s.scale}};
}

}  // namespace

Json truth_json(const GroundTruth& truth, const Dataset& data) {
    const auto names = variable_names(data);
    Json j = graph_json(truth.dag.pdag(), names);
    j["seed"] = truth.seed;
    j["rng"] = truth.rng;
    if (!truth.preset.empty()) j["preset"] = truth.preset;
    Json vars = Json::array();
    for (std::size_t v = 0; v < truth.vars.size(); ++v) {
        const auto& vt = truth.vars[v];
        Json r{{"name", names[v]}, {"dim", vt.dim}};
        if (vt.root) {
            r["source"] = noise_json(vt.mechanism.noise);
        } else {
            if (truth.preset.empty()) {
                r["f"] = transform_json(vt.mechanism.f);
                r["g"] = transform_json(vt.mechanism.g);
            }
            r["noise"] = noise_json(vt.mechanism.noise);
            r["shift"] = vt.shift;
            r["scale"] = vt.scale;
        }
        if (vt.discrete) r["range"] = {vt.range_lo, vt.range_hi};
        vars.push_back(std::move(r));
    }
    j["variables"] = std::move(vars);
    return j;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

Json read_json(const std::string& path) {
    try {
        return Json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace kcdisc
