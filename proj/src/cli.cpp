#include "kcdisc/cli.hpp"

#include "kcdisc/io.hpp"
#include "kcdisc/metrics.hpp"
#include "kcdisc/parallel.hpp"
#include "kcdisc/search.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

namespace kcdisc {

namespace {

// Argument problems that are only detectable after parsing.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed3(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", x);
    return buf;
}

void require_file(const std::string& path) {
    if (!std::filesystem::is_regular_file(path)) throw UsageError("input file '" + path + "' does not exist");
}

Dataset load_dataset(const std::string& csv, const std::string& meta_opt) {
    const std::string meta = meta_opt.empty() ? meta_path_for(csv) : meta_opt;
    require_file(csv);
    require_file(meta);
    return read_dataset(csv, meta);
}

std::vector<int> resolve_names(const Dataset& data, const std::vector<std::string>& names) {
    std::vector<int> ids;
    for (const auto& name : names) {
        try {
            ids.push_back(data.index_of(name));
        } catch (const std::exception&) {
            throw UsageError("unknown variable '" + name + "'");
        }
    }
    return ids;
}

Json params_json(const ScoreParams& p) {
    return Json{{"sigma_x", p.sigma_x}, {"sigma_p", p.sigma_p}, {"sigma_eps", p.sigma_eps}};
}

Json step_json(const SearchStep& s, const std::vector<std::string>& names) {
    std::vector<std::string> subset;
    for (int v : s.op.subset) subset.push_back(names[static_cast<std::size_t>(v)]);
    return Json{{"op", s.op.kind == OperatorKind::insert ? "insert" : "delete"},
                {"x", names[static_cast<std::size_t>(s.op.x)]},
                {"y", names[static_cast<std::size_t>(s.op.y)]},
                {"subset", subset},
                {"delta", s.op.delta},
                {"score_before", s.score_before},
                {"score_after", s.score_after}};
}

struct DiscoverOutcome {
    GesResult result;
    Json details;
};

DiscoverOutcome discover(const Dataset& data, ScoreKind kind, int workers) {
    KernelScorer scorer(data, kind);
    SearchOptions opts;
    opts.workers = workers;
    DiscoverOutcome out{ges(scorer, opts), Json::object()};
    const auto names = variable_names(data);
    const Dag ext = consistent_extension(out.result.graph);
    Json families = Json::array();
    for (int v = 0; v < data.num_variables(); ++v) {
        const auto parents = ext.parents(v);
        const auto fit = scorer.family(v, parents);
        std::vector<std::string> pnames;
        for (int p : parents) pnames.push_back(names[static_cast<std::size_t>(p)]);
        families.push_back(Json{{"target", names[static_cast<std::size_t>(v)]},
                                {"parents", pnames},
                                {"score", fit.value},
                                {"params", params_json(fit.params)},
                                {"iterations", fit.iterations},
                                {"converged", fit.converged}});
    }
    Json forward = Json::array();
    for (const auto& s : out.result.forward) forward.push_back(step_json(s, names));
    Json backward = Json::array();
    for (const auto& s : out.result.backward) backward.push_back(step_json(s, names));
    out.details = Json{{"score_kind", to_string(kind)},
                       {"total_score", out.result.score},
                       {"graph", graph_json(out.result.graph.pdag(), names)},
                       {"families", std::move(families)},
                       {"forward", std::move(forward)},
                       {"backward", std::move(backward)},
                       {"families_optimized", scorer.cache().size()}};
    return out;
}

// Reads either a ground-truth / DAG graph JSON. Returns the node names and the
// graph with directed edges only.
NamedGraph load_graph(const std::string& path) {
    require_file(path);
    return graph_from_json(read_json(path));
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
    GenConfig config;
    std::string kind = "continuous";
    std::string preset;
    std::string out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    Generated gen;
    if (a.preset == "chain") {
        gen = generate_chain(a.config.n, a.config.seed);
    } else if (a.preset.empty()) {
        GenConfig c = a.config;
        c.kind = parse_data_kind(a.kind);
        if (c.kind == DataKind::discrete) c.discrete_ratio = 1.0;
        validate(c);
        gen = generate(c);
    } else {
        throw UsageError("unknown preset '" + a.preset + "'");
    }
    const auto paths = dataset_paths(a.out);
    const auto parent = std::filesystem::path(a.out).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    write_text(paths.csv, dataset_to_csv(gen.data));
    write_json(paths.meta, dataset_meta_json(gen.data));
    write_json(paths.truth, truth_json(gen.truth, gen.data));
    out << paths.csv << '\n' << paths.meta << '\n' << paths.truth << '\n';
    return kExitOk;
}

// --- discover ---------------------------------------------------------------

struct DiscoverArgs {
    std::string data;
    std::string meta;
    std::string score = "ours";
    std::string out;
    std::string details;
    int workers = 1;
};

int cmd_discover(const DiscoverArgs& a, std::ostream& out) {
    const auto kind = parse_score_kind(a.score);
    const Dataset data = load_dataset(a.data, a.meta);
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = discover(data, kind, a.workers);
    const double wall = seconds_since(t0);
    write_json(a.out, graph_json(res.result.graph.pdag(), variable_names(data)));
    if (!a.details.empty()) write_json(a.details, res.details);
    out << "score " << format_double(res.result.score) << ", " << res.result.graph.num_edges() << " edges, "
        << res.result.forward.size() << " inserts, " << res.result.backward.size() << " deletes, wall time "
        << fixed3(wall) << " s\n";
    return kExitOk;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
    std::string estimate;
    std::string truth;
    std::string out;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const auto est = load_graph(a.estimate);
    const auto tru = load_graph(a.truth);
    if (est.nodes != tru.nodes) {
        std::set<std::string> e(est.nodes.begin(), est.nodes.end());
        std::set<std::string> t(tru.nodes.begin(), tru.nodes.end());
        std::string msg = "variable names differ between estimate and truth";
        for (const auto& n : e) {
            if (!t.count(n)) msg += "; '" + n + "' only in estimate";
        }
        for (const auto& n : t) {
            if (!e.count(n)) msg += "; '" + n + "' only in truth";
        }
        if (e == t) msg += " (same names, different order)";
        throw UsageError(msg);
    }
    if (!tru.graph.undirected_edges().empty()) throw UsageError("truth graph must be a DAG");
    const Dag truth = Dag::from_pdag(tru.graph);
    const Cpdag estimate = pdag_to_cpdag(est.graph);
    const auto r = evaluate(estimate, truth);
    const Json report{{"q", r.q},
                      {"precision", r.precision},
                      {"recall", r.recall},
                      {"f1", r.f1},
                      {"shd", r.shd},
                      {"normalized_shd", r.normalized_shd},
                      {"shd_convention", "one unit per vertex pair with a missing, extra, reversed, or "
                                         "directed-vs-undirected mismatch; normalized by q(q-1)/2"}};
    if (!a.out.empty()) write_json(a.out, report);
    out << "f1 " << fixed3(r.f1) << " (precision " << fixed3(r.precision) << ", recall " << fixed3(r.recall)
        << "), shd " << r.shd << ", normalized shd " << fixed3(r.normalized_shd) << '\n';
    return kExitOk;
}

// --- diagnose ---------------------------------------------------------------

struct DiagnoseArgs {
    std::string data;
    std::string meta;
    std::string target;
    std::vector<std::string> parents;
    std::string candidate;
    std::string out;
};

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out) {
    const Dataset raw = load_dataset(a.data, a.meta);
    const int target = resolve_names(raw, {a.target}).front();
    auto parents = resolve_names(raw, a.parents);
    const int candidate = resolve_names(raw, {a.candidate}).front();
    std::sort(parents.begin(), parents.end());
    if (std::adjacent_find(parents.begin(), parents.end()) != parents.end()) throw UsageError("repeated parent");
    if (std::find(parents.begin(), parents.end(), target) != parents.end()) {
        throw UsageError("target cannot be one of its parents");
    }
    if (candidate == target) throw UsageError("candidate must differ from the target");
    if (std::find(parents.begin(), parents.end(), candidate) != parents.end()) {
        throw UsageError("candidate must not be one of the parents");
    }
    const Dataset data = standardized(raw);
    const auto trained = optimize_local_score(data, target, parents, ScoreKind::ours);
    const auto fixed = baseline_marg_score(data, target, parents);
    const double h_trained = residual_hsic_diagnostic(data, target, parents, candidate, trained.params);
    const double h_fixed = residual_hsic_diagnostic(data, target, parents, candidate, fixed.params);
    Json trained_j = params_json(trained.params);
    trained_j["hsic"] = h_trained;
    Json fixed_j = params_json(fixed.params);
    fixed_j["hsic"] = h_fixed;
    const Json report{{"target", a.target},
                      {"parents", a.parents},
                      {"candidate", a.candidate},
                      {"trained", std::move(trained_j)},
                      {"fixed", std::move(fixed_j)}};
    if (!a.out.empty()) write_json(a.out, report);
    out << report.dump(2) << '\n';
    return kExitOk;
}

// --- bench ------------------------------------------------------------------

struct BenchArgs {
    int vars = 8;
    std::vector<double> densities{0.2, 0.4, 0.6, 0.8};
    std::vector<int> ns{200};
    std::vector<std::string> kinds{"continuous"};
    std::vector<std::string> scores{"ours", "marg"};
    int reps = 5;
    std::uint64_t seed = 0;
    std::string out_dir;
    int workers = 1;
};

std::string row_key(const BenchRow& r) {
    return r.data_kind + "|" + format_double(r.density) + "|" + std::to_string(r.n) + "|" + std::to_string(r.rep) +
           "|" + r.score;
}

BenchRow run_bench_row(BenchRow row, int vars) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        GenConfig c;
        c.num_vars = vars;
        c.density = row.density;
        c.n = row.n;
        c.kind = parse_data_kind(row.data_kind);
        if (c.kind == DataKind::discrete) c.discrete_ratio = 1.0;
        c.seed = row.seed;
        const auto gen = generate(c);
        KernelScorer scorer(gen.data, parse_score_kind(row.score));
        const auto res = ges(scorer);
        const auto r = evaluate(res.graph, gen.truth.dag);
        row.status = "ok";
        row.f1 = r.f1;
        row.shd = r.shd;
        row.normalized_shd = r.normalized_shd;
    } catch (const std::exception& e) {
        row.status = "failed";
        row.error = e.what();
    }
    row.wall_time = seconds_since(t0);
    return row;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    if (a.reps < 1) throw UsageError("--reps must be positive");
    for (double d : a.densities) {
        if (!(d > 0.0 && d <= 1.0)) throw UsageError("densities must lie in (0, 1]");
    }
    for (const auto& s : a.scores) parse_score_kind(s);
    std::vector<BenchRow> plan;
    for (const auto& kind : a.kinds) {
        const auto dk = parse_data_kind(kind);
        for (double d : a.densities) {
            for (int n : a.ns) {
                for (int rep = 0; rep < a.reps; ++rep) {
                    for (const auto& s : a.scores) {
                        BenchRow r;
                        r.data_kind = kind;
                        r.density = d;
                        r.n = n;
                        r.rep = rep;
                        r.seed = bench_seed(a.seed, dk, d, n, rep);
                        r.score = s;
                        plan.push_back(std::move(r));
                    }
                }
            }
        }
    }
    std::filesystem::create_directories(a.out_dir);
    const auto results_path = (std::filesystem::path(a.out_dir) / "results.csv").string();
    const auto summary_path = (std::filesystem::path(a.out_dir) / "summary.csv").string();

    std::map<std::string, BenchRow> done;
    if (std::filesystem::exists(results_path)) {
        for (auto& r : parse_bench_csv(read_text(results_path))) {
            if (r.status == "ok") done[row_key(r)] = std::move(r);
        }
    }
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const auto it = done.find(row_key(plan[i]));
        if (it != done.end() && it->second.seed == plan[i].seed) {
            plan[i] = it->second;
        } else {
            pending.push_back(i);
        }
    }
    out << plan.size() << " runs, " << plan.size() - pending.size() << " already complete\n";

    // Completed rows are appended as they finish so an interrupted matrix can resume.
    {
        std::string existing;
        for (const auto& r : plan) {
            if (!r.status.empty()) existing += bench_row_csv(r) + "\n";
        }
        write_text(results_path, std::string(kBenchHeader) + "\n" + existing);
    }
    std::mutex mutex;
    parallel_for(pending.size(), a.workers, [&](std::size_t k) {
        BenchRow row = run_bench_row(plan[pending[k]], a.vars);
        std::lock_guard lock(mutex);
        plan[pending[k]] = row;
        std::ofstream f(results_path, std::ios::app | std::ios::binary);
        f << bench_row_csv(row) << '\n';
        out << row.data_kind << " density " << format_double(row.density) << " n " << row.n << " rep " << row.rep
            << " " << row.score << ": " << row.status;
        if (row.status == "ok") out << " f1 " << fixed3(row.f1) << " shd " << row.shd;
        out << " (" << fixed3(row.wall_time) << " s)\n";
    });

    std::string canonical = std::string(kBenchHeader) + "\n";
    for (const auto& r : plan) canonical += bench_row_csv(r) + "\n";
    write_text(results_path, canonical);
    write_text(summary_path, bench_summary_csv(plan));
    out << results_path << '\n' << summary_path << '\n';
    return kExitOk;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '\n') {
            q += ' ';
        } else {
            q += c;
            if (c == '"') q += '"';
        }
    }
    return q + "\"";
}

}  // namespace

int default_workers() {
    if (const char* env = std::getenv("KCDISC_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    return 1;
}

std::uint64_t bench_seed(std::uint64_t base, DataKind kind, double density, int n, int rep) {
    std::uint64_t h = splitmix64_mix(base);
    for (std::uint64_t part : {static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(std::llround(density * 1e6)),
                               static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)}) {
        h = splitmix64_mix(h ^ part);
    }
    return h >> 33;  // keep seeds short enough to read in tables
}

std::string bench_row_csv(const BenchRow& r) {
    std::ostringstream os;
    os << r.data_kind << ',' << format_double(r.density) << ',' << r.n << ',' << r.rep << ',' << r.seed << ','
       << r.score << ',' << r.status << ',' << format_double(r.f1) << ',' << r.shd << ','
       << format_double(r.normalized_shd) << ',' << fixed3(r.wall_time) << ',' << csv_quote(r.error);
    return os.str();
}

std::vector<BenchRow> parse_bench_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != kBenchHeader) throw IoError("results CSV has an unexpected header");
    std::vector<BenchRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 12) throw IoError("results CSV row has " + std::to_string(f.size()) + " fields");
        try {
            BenchRow r;
            r.data_kind = f[0];
            r.density = std::stod(f[1]);
            r.n = std::stoi(f[2]);
            r.rep = std::stoi(f[3]);
            r.seed = std::stoull(f[4]);
            r.score = f[5];
            r.status = f[6];
            r.f1 = std::stod(f[7]);
            r.shd = std::stoi(f[8]);
            r.normalized_shd = std::stod(f[9]);
            r.wall_time = std::stod(f[10]);
            r.error = f[11];
            rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw IoError("results CSV row is malformed: " + line);
        }
    }
    return rows;
}

std::string bench_summary_csv(const std::vector<BenchRow>& rows) {
    struct Acc {
        std::vector<double> f1, nshd, shd;
        int failed = 0;
    };
    // Keyed in first-appearance order.
    std::vector<std::string> order;
    std::map<std::string, Acc> cells;
    std::map<std::string, const BenchRow*> first;
    for (const auto& r : rows) {
        const std::string key =
            r.data_kind + "," + format_double(r.density) + "," + std::to_string(r.n) + "," + r.score;
        if (!cells.count(key)) {
            order.push_back(key);
            first[key] = &r;
        }
        auto& acc = cells[key];
        if (r.status == "ok") {
            acc.f1.push_back(r.f1);
            acc.nshd.push_back(r.normalized_shd);
            acc.shd.push_back(r.shd);
        } else {
            ++acc.failed;
        }
    }
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    auto stderr_of = [&](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        const double m = mean(v);
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    };
    std::string out = "data_kind,density,n,score,runs,failed,f1_mean,f1_stderr,shd_mean,normalized_shd_mean,"
                      "normalized_shd_stderr\n";
    for (const auto& key : order) {
        const auto& a = cells[key];
        out += key + "," + std::to_string(a.f1.size()) + "," + std::to_string(a.failed) + "," +
               format_double(mean(a.f1)) + "," + format_double(stderr_of(a.f1)) + "," + format_double(mean(a.shd)) +
               "," + format_double(mean(a.nshd)) + "," + format_double(stderr_of(a.nshd)) + "\n";
    }
    return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kernel-score causal discovery"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "kcdisc 0.1.0");

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Sample a synthetic dataset with its ground-truth graph");
    g->add_option("--vars", gen.config.num_vars, "Number of variables")->capture_default_str();
    g->add_option("--density", gen.config.density, "Edges as a fraction of q(q-1)/2")->capture_default_str();
    g->add_option("--n", gen.config.n, "Sample count")->capture_default_str();
    g->add_option("--kind", gen.kind, "continuous | mixed | discrete | multidim")->capture_default_str();
    g->add_option("--discrete-ratio", gen.config.discrete_ratio, "Fraction of discretized variables (mixed)")
        ->capture_default_str();
    g->add_option("--seed", gen.config.seed, "Generator seed")->required();
    g->add_option("--preset", gen.preset, "Fixed-structure dataset instead of a random graph: chain");
    g->add_option("--out", gen.out, "Output prefix; writes <prefix>.csv, .meta.json, .truth.json")->required();

    DiscoverArgs dis;
    dis.workers = default_workers();
    auto* d = app.add_subcommand("discover", "Run greedy equivalence search on a dataset");
    d->add_option("--data", dis.data, "Dataset CSV")->required();
    d->add_option("--meta", dis.meta, "Metadata JSON (default: <data>.meta.json)");
    d->add_option("--score", dis.score, "ours | marg | gp")->capture_default_str();
    d->add_option("--out", dis.out, "Recovered graph JSON")->required();
    d->add_option("--details", dis.details, "Per-family parameters and search trace JSON");
    d->add_option("--workers", dis.workers, "Concurrent family optimizations")->check(CLI::PositiveNumber);

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "Compare a recovered graph with the ground truth");
    e->add_option("--estimate", ev.estimate, "Recovered graph JSON")->required();
    e->add_option("--truth", ev.truth, "Ground-truth JSON (or any DAG graph JSON)")->required();
    e->add_option("--out", ev.out, "Report JSON");

    DiagnoseArgs dg;
    auto* dgn = app.add_subcommand("diagnose", "Residual HSIC with trained vs median-heuristic response kernel");
    dgn->add_option("--data", dg.data, "Dataset CSV")->required();
    dgn->add_option("--meta", dg.meta, "Metadata JSON (default: <data>.meta.json)");
    dgn->add_option("--target", dg.target, "Target variable name")->required();
    dgn->add_option("--parents", dg.parents, "Parent variable names")->delimiter(',');
    dgn->add_option("--candidate", dg.candidate, "Variable tested against the residual")->required();
    dgn->add_option("--out", dg.out, "Report JSON");

    BenchArgs bn;
    bn.workers = default_workers();
    auto* b = app.add_subcommand("bench", "Run the generate/discover/evaluate matrix");
    b->add_option("--vars", bn.vars, "Variables per graph")->capture_default_str();
    b->add_option("--densities", bn.densities, "Graph densities")->delimiter(',')->capture_default_str();
    b->add_option("--n", bn.ns, "Sample sizes")->delimiter(',')->capture_default_str();
    b->add_option("--kinds", bn.kinds, "Data kinds")->delimiter(',')->capture_default_str();
    b->add_option("--scores", bn.scores, "Score kinds")->delimiter(',')->capture_default_str();
    b->add_option("--reps", bn.reps, "Repetitions per cell")->capture_default_str();
    b->add_option("--seed", bn.seed, "Base seed")->capture_default_str();
    b->add_option("--out-dir", bn.out_dir, "Directory for results.csv and summary.csv")->required();
    b->add_option("--workers", bn.workers, "Concurrent runs")->check(CLI::PositiveNumber);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& ex) {
        return app.exit(ex, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*g) return cmd_generate(gen, out);
        if (*d) return cmd_discover(dis, out);
        if (*e) return cmd_evaluate(ev, out);
        if (*dgn) return cmd_diagnose(dg, out);
        if (*b) return cmd_bench(bn, out);
    } catch (const UsageError& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace kcdisc
