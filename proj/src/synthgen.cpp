#include "kcdisc/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace kcdisc {

std::string to_string(DataKind kind) {
    switch (kind) {
        case DataKind::continuous: return "continuous";
        case DataKind::mixed: return "mixed";
        case DataKind::discrete: return "discrete";
        case DataKind::multidim: return "multidim";
    }
    return "?";
}

DataKind parse_data_kind(const std::string& s) {
    for (auto k : {DataKind::continuous, DataKind::mixed, DataKind::discrete, DataKind::multidim}) {
        if (to_string(k) == s) return k;
    }
    throw std::invalid_argument("unknown data kind '" + s + "'");
}

std::string to_string(FnKind kind) {
    switch (kind) {
        case FnKind::linear: return "linear";
        case FnKind::sin: return "sin";
        case FnKind::cos: return "cos";
        case FnKind::tanh: return "tanh";
        case FnKind::exp: return "exp";
        case FnKind::power: return "power";
    }
    return "?";
}

std::string to_string(NoiseKind kind) { return kind == NoiseKind::gaussian ? "gaussian" : "uniform"; }

void validate(const GenConfig& c) {
    if (c.num_vars < 2) throw std::invalid_argument("num_vars must be at least 2");
    if (!(c.density > 0.0 && c.density <= 1.0)) throw std::invalid_argument("density must lie in (0, 1]");
    if (c.n < 2) throw std::invalid_argument("n must be at least 2");
    if (!(c.discrete_ratio >= 0.0 && c.discrete_ratio <= 1.0)) {
        throw std::invalid_argument("discrete_ratio must lie in [0, 1]");
    }
}

double apply(const Transform& t, double x) {
    switch (t.kind) {
        case FnKind::linear: return t.param * x;
        case FnKind::sin: return std::sin(x);
        case FnKind::cos: return std::cos(x);
        case FnKind::tanh: return std::tanh(x);
        case FnKind::exp: return std::exp(std::clamp(x, -5.0, 5.0));
        case FnKind::power: return std::pow(x, t.param);
    }
    return x;
}

namespace {

Transform sample_transform(Rng& rng) {
    Transform t;
    t.kind = static_cast<FnKind>(rng.uniform_int(0, 5));
    if (t.kind == FnKind::linear) t.param = rng.coin() ? 2.5 : 0.5;
    if (t.kind == FnKind::power) t.param = rng.uniform_int(1, 3);
    return t;
}

double draw(const NoiseSpec& s, Rng& rng) {
    return s.kind == NoiseKind::gaussian ? s.scale * rng.normal() : rng.uniform(-s.scale, s.scale);
}

Eigen::MatrixXd draw_block(const NoiseSpec& s, int n, int dim, Rng& rng) {
    Eigen::MatrixXd out(n, dim);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < dim; ++k) out(i, k) = draw(s, rng);
    }
    return out;
}

// Offsets of each variable's columns inside the latent matrix.
std::vector<int> offsets_of(const std::vector<VariableTruth>& vars) {
    std::vector<int> off(vars.size() + 1, 0);
    for (std::size_t v = 0; v < vars.size(); ++v) off[v + 1] = off[v] + vars[v].dim;
    return off;
}

// g(f(sum of parent coordinates) + noise), before standardization.
Eigen::MatrixXd mechanism_output(const Eigen::MatrixXd& latent, const std::vector<int>& off,
                                 const std::vector<int>& parents, const Mechanism& m, const Eigen::MatrixXd& noise) {
    const Eigen::Index n = noise.rows();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
    for (int p : parents) {
        for (int c = off[static_cast<std::size_t>(p)]; c < off[static_cast<std::size_t>(p) + 1]; ++c) {
            sum += latent.col(c);
        }
    }
    Eigen::MatrixXd out(n, noise.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double fx = apply(m.f, sum(i));
        for (Eigen::Index k = 0; k < noise.cols(); ++k) out(i, k) = apply(m.g, fx + noise(i, k));
    }
    return out;
}

}  // namespace

Mechanism sample_mechanism(Rng& rng) {
    Mechanism m;
    m.f = sample_transform(rng);
    m.g = sample_transform(rng);
    m.noise.kind = rng.coin() ? NoiseKind::uniform : NoiseKind::gaussian;
    m.noise.scale = 0.5;
    return m;
}

int edge_count(int q, double density) {
    return static_cast<int>(std::llround(density * q * (q - 1) / 2.0));
}

Dag random_dag(int q, double density, Rng& rng) {
    if (q < 2) throw std::invalid_argument("random_dag needs at least 2 nodes");
    if (!(density > 0.0 && density <= 1.0)) throw std::invalid_argument("density must lie in (0, 1]");
    std::vector<int> order(static_cast<std::size_t>(q));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<int>(order));
    std::vector<Edge> pairs;
    for (int i = 0; i < q; ++i) {
        for (int j = i + 1; j < q; ++j) pairs.emplace_back(i, j);
    }
    rng.shuffle(std::span<Edge>(pairs));
    const int m = edge_count(q, density);
    std::vector<Edge> edges;
    for (int k = 0; k < m; ++k) {
        const auto [i, j] = pairs[static_cast<std::size_t>(k)];
        edges.emplace_back(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    return Dag::from_edges(q, edges);
}

Eigen::VectorXd quantile_discretize(const Eigen::VectorXd& x, int bins) {
    if (bins < 2) throw std::invalid_argument("need at least 2 bins");
    const Eigen::Index n = x.size();
    std::vector<double> sorted(x.data(), x.data() + n);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> thresholds;
    for (int k = 1; k < bins; ++k) {
        thresholds.push_back(sorted[static_cast<std::size_t>((static_cast<long>(k) * n) / bins)]);
    }
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        int code = 1;
        for (double t : thresholds) code += x(i) >= t ? 1 : 0;
        out(i) = code;
    }
    return out;
}

Generated generate(const GenConfig& config) {
    validate(config);
    const int q = config.num_vars;
    const int n = config.n;
    Rng rng(config.seed);

    Generated gen;
    gen.truth.seed = config.seed;
    gen.truth.dag = random_dag(q, config.density, rng);
    gen.truth.vars.resize(static_cast<std::size_t>(q));
    for (auto& v : gen.truth.vars) v.dim = config.kind == DataKind::multidim ? rng.uniform_int(1, 5) : 1;

    int num_discrete = 0;
    if (config.kind == DataKind::mixed) num_discrete = static_cast<int>(std::llround(config.discrete_ratio * q));
    if (config.kind == DataKind::discrete) num_discrete = q;
    std::vector<int> pick(static_cast<std::size_t>(q));
    std::iota(pick.begin(), pick.end(), 0);
    rng.shuffle(std::span<int>(pick));
    for (int k = 0; k < num_discrete; ++k) {
        auto& v = gen.truth.vars[static_cast<std::size_t>(pick[static_cast<std::size_t>(k)])];
        v.discrete = true;
        v.range_lo = 1;
        v.range_hi = rng.coin() ? 20 : 5;
    }

    const auto off = offsets_of(gen.truth.vars);
    gen.latent = Eigen::MatrixXd::Zero(n, off.back());
    gen.noise.resize(static_cast<std::size_t>(q));
    for (int v : gen.truth.dag.topological_order()) {
        auto& vt = gen.truth.vars[static_cast<std::size_t>(v)];
        const auto parents = gen.truth.dag.parents(v);
        vt.root = parents.empty();
        if (vt.root) {
            vt.mechanism.noise = rng.coin() ? NoiseSpec{NoiseKind::uniform, 1.0} : NoiseSpec{NoiseKind::gaussian, 1.0};
            gen.noise[static_cast<std::size_t>(v)] = draw_block(vt.mechanism.noise, n, vt.dim, rng);
            gen.latent.middleCols(off[static_cast<std::size_t>(v)], vt.dim) = gen.noise[static_cast<std::size_t>(v)];
            continue;
        }
        constexpr int kAttempts = 10;
        bool ok = false;
        Eigen::MatrixXd raw;
        for (int attempt = 0; attempt < kAttempts && !ok; ++attempt) {
            vt.mechanism = sample_mechanism(rng);
            gen.noise[static_cast<std::size_t>(v)] = draw_block(vt.mechanism.noise, n, vt.dim, rng);
            raw = mechanism_output(gen.latent, off, parents, vt.mechanism, gen.noise[static_cast<std::size_t>(v)]);
            ok = raw.allFinite();
            vt.shift.assign(static_cast<std::size_t>(vt.dim), 0.0);
            vt.scale.assign(static_cast<std::size_t>(vt.dim), 1.0);
            for (int k = 0; k < vt.dim && ok; ++k) {
                const double mean = raw.col(k).mean();
                const double sd = std::sqrt((raw.col(k).array() - mean).square().mean());
                ok = sd > 1e-12;
                vt.shift[static_cast<std::size_t>(k)] = mean;
                vt.scale[static_cast<std::size_t>(k)] = sd;
            }
        }
        if (!ok) {
            throw std::runtime_error("could not draw a non-degenerate mechanism for variable X" + std::to_string(v));
        }
        gen.latent.middleCols(off[static_cast<std::size_t>(v)], vt.dim) = regenerate_variable(gen, v);
    }

    Eigen::MatrixXd values = gen.latent;
    std::vector<Variable> vars;
    for (int v = 0; v < q; ++v) {
        const auto& vt = gen.truth.vars[static_cast<std::size_t>(v)];
        Variable var{"X" + std::to_string(v), vt.dim, VarType::continuous, 0, 0};
        if (vt.discrete) {
            var.type = VarType::discrete;
            var.range_lo = vt.range_lo;
            var.range_hi = vt.range_hi;
            for (int k = 0; k < vt.dim; ++k) {
                const int c = off[static_cast<std::size_t>(v)] + k;
                values.col(c) = quantile_discretize(gen.latent.col(c), vt.range_hi);
            }
        }
        vars.push_back(std::move(var));
    }
    gen.data = Dataset(std::move(values), std::move(vars));
    return gen;
}

Eigen::MatrixXd regenerate_variable(const Generated& gen, int v) {
    const auto& vt = gen.truth.vars.at(static_cast<std::size_t>(v));
    const auto& noise = gen.noise.at(static_cast<std::size_t>(v));
    if (vt.root) return noise;
    if (gen.truth.preset == kChainPreset) {
        const Eigen::ArrayXd p = gen.latent.col(v - 1).array();
        return (1.5 * p.square() + noise.col(0).array()).cos().square().matrix();
    }
    const auto off = offsets_of(gen.truth.vars);
    Eigen::MatrixXd out = mechanism_output(gen.latent, off, gen.truth.dag.parents(v), vt.mechanism, noise);
    for (int k = 0; k < vt.dim; ++k) {
        out.col(k) = (out.col(k).array() - vt.shift[static_cast<std::size_t>(k)]) / vt.scale[static_cast<std::size_t>(k)];
    }
    return out;
}

Generated generate_chain(int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("n must be at least 2");
    Rng rng(seed);
    Generated gen;
    gen.truth.seed = seed;
    gen.truth.dag = Dag::from_edges(3, {{0, 1}, {1, 2}});
    gen.truth.vars.resize(3);
    const NoiseSpec source{NoiseKind::gaussian, 1.0};
    const NoiseSpec step_noise{NoiseKind::gaussian, 0.5};
    gen.truth.preset = kChainPreset;
    gen.truth.vars[0].mechanism.noise = source;
    for (int v : {1, 2}) {
        auto& vt = gen.truth.vars[static_cast<std::size_t>(v)];
        vt.root = false;
        vt.mechanism.noise = step_noise;
        vt.shift = {0.0};
        vt.scale = {1.0};
    }
    gen.noise = {draw_block(source, n, 1, rng), draw_block(step_noise, n, 1, rng), draw_block(step_noise, n, 1, rng)};
    gen.latent.resize(n, 3);
    gen.latent.col(0) = gen.noise[0];
    gen.latent.col(1) = regenerate_variable(gen, 1);
    gen.latent.col(2) = regenerate_variable(gen, 2);
    gen.data = Dataset(gen.latent, {{"Z"}, {"Y"}, {"X"}});
    return gen;
}

}  // namespace kcdisc
