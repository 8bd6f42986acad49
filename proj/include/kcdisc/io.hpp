#pragma once

#include "kcdisc/dataset.hpp"
#include "kcdisc/graph.hpp"
#include "kcdisc/synthgen.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace kcdisc {

using Json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

// `<prefix>.csv`, `<prefix>.meta.json`, `<prefix>.truth.json`.
struct DatasetPaths {
    std::string csv;
    std::string meta;
    std::string truth;
};
DatasetPaths dataset_paths(const std::string& prefix);
// Sidecar metadata path for a CSV path: foo.csv -> foo.meta.json.
std::string meta_path_for(const std::string& csv_path);

// CSV header names columns `<variable>.<dim>`, e.g. X3.0, X3.1.
std::string dataset_to_csv(const Dataset& data);
Json dataset_meta_json(const Dataset& data);
Dataset dataset_from_csv(const std::string& csv_text, const Json& meta);
Dataset read_dataset(const std::string& csv_path, const std::string& meta_path);

// {"nodes": [...], "directed": [[a, b], ...], "undirected": [[a, b], ...]}
// with node names in the edge lists.
Json graph_json(const Pdag& g, const std::vector<std::string>& names);
struct NamedGraph {
    std::vector<std::string> nodes;
    Pdag graph;
};
NamedGraph graph_from_json(const Json& j);

// Graph JSON of the true DAG plus generator record.
Json truth_json(const GroundTruth& truth, const Dataset& data);

std::vector<std::string> variable_names(const Dataset& data);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);
Json read_json(const std::string& path);
// Two-space indented, trailing newline.
void write_json(const std::string& path, const Json& j);

}  // namespace kcdisc
