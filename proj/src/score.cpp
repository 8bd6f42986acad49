#include "kcdisc/score.hpp"

#include "kcdisc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

namespace kcdisc {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void check_family(const Dataset& data, int target, std::span<const int> parents) {
    const int q = data.num_variables();
    if (target < 0 || target >= q) throw std::invalid_argument("target variable out of range");
    for (int p : parents) {
        if (p < 0 || p >= q) throw std::invalid_argument("parent variable out of range");
        if (p == target) throw std::invalid_argument("target cannot be its own parent");
    }
    if (data.num_samples() < 2) throw std::invalid_argument("scoring needs at least two samples");
}

// Logistic map between an unconstrained coordinate and a box.
double to_box(double u, ParamBox b) { return b.lo + (b.hi - b.lo) / (1.0 + std::exp(-u)); }

double box_slope(double u, ParamBox b) {
    const double s = 1.0 / (1.0 + std::exp(-u));
    return (b.hi - b.lo) * s * (1.0 - s);
}

double from_box(double sigma, ParamBox b) {
    double frac = (sigma - b.lo) / (b.hi - b.lo);
    frac = std::clamp(frac, 1e-6, 1.0 - 1e-6);
    return std::log(frac / (1.0 - frac));
}

}  // namespace

std::string to_string(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::ours: return "ours";
        case ScoreKind::marg: return "marg";
        case ScoreKind::gp: return "gp";
    }
    return "?";
}

ScoreKind parse_score_kind(const std::string& s) {
    if (s == "ours") return ScoreKind::ours;
    if (s == "marg") return ScoreKind::marg;
    if (s == "gp") return ScoreKind::gp;
    throw std::invalid_argument("unknown score kind '" + s + "' (expected ours, marg or gp)");
}

bool within_bounds(const ScoreParams& p) {
    return p.sigma_x >= kSigmaXBox.lo && p.sigma_x <= kSigmaXBox.hi && p.sigma_p >= kSigmaPBox.lo &&
           p.sigma_p <= kSigmaPBox.hi && p.sigma_eps >= kSigmaEpsBox.lo && p.sigma_eps <= kSigmaEpsBox.hi;
}

JacobianTerm jacobian_term(const SampleBlock& target_block, double sigma_x) {
    if (!(sigma_x > 0.0)) throw std::invalid_argument("sigma_x must be positive");
    const Eigen::Index n = target_block.rows();
    if (n < 2) throw std::invalid_argument("jacobian_term needs at least two samples");
    JacobianTerm out;
    const double log_sigma = std::log(sigma_x);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double d2 = (target_block.row(i) - target_block.row(j)).squaredNorm();
            // log |K'| = log k + log |x^i - x^j| - 2 log sigma, same for (i,j) and (j,i)
            double term;
            if (d2 > 0.0) {
                term = -d2 / (2.0 * sigma_x * sigma_x) + 0.5 * std::log(d2) - 2.0 * log_sigma;
            } else {
                term = std::log(kDuplicatePairFloor);
                out.degenerate_pairs += 2;
            }
            out.value += 2.0 * term;
        }
    }
    return out;
}

FamilyModel::FamilyModel(const Dataset& data, int target, std::span<const int> parents, RootKernel root)
    : n_(data.num_samples()), has_parents_(!parents.empty()), root_(root) {
    check_family(data, target, parents);
    target_ = data.block(target);
    d2_target_ = squared_distances(target_);
    target_bw_ = median_heuristic(target_);
    if (has_parents_) {
        const Eigen::MatrixXd pa = data.block(parents);
        d2_parents_ = squared_distances(pa);
        parent_bw_ = median_heuristic(pa);
    }
    for (int j = 0; j < n_; ++j) {
        for (int i = j + 1; i < n_; ++i) {
            const double d2 = d2_target_(i, j);
            if (d2 > 0.0) {
                jac_sum_log_dist_ += 2.0 * 0.5 * std::log(d2);
                jac_sum_sq_dist_ += 2.0 * d2;
                jac_pairs_ += 2.0;
            } else {
                degenerate_pairs_ += 2;
            }
        }
    }
}

double FamilyModel::jacobian(double sigma_x) const {
    return -jac_sum_sq_dist_ / (2.0 * sigma_x * sigma_x) + jac_sum_log_dist_ -
           2.0 * jac_pairs_ * std::log(sigma_x) + degenerate_pairs_ * std::log(kDuplicatePairFloor);
}

Eigen::MatrixXd FamilyModel::target_kernel(double sigma_x) const {
    return kernel_from_sq_distances(d2_target_, sigma_x);
}

Eigen::MatrixXd FamilyModel::parent_kernel(double sigma_p) const {
    if (has_parents_) return kernel_from_sq_distances(d2_parents_, sigma_p);
    if (root_ == RootKernel::constant) return Eigen::MatrixXd::Ones(n_, n_);
    return Eigen::MatrixXd::Zero(n_, n_);
}

double FamilyModel::value(ScoreKind kind, const ScoreParams& p) const { return evaluate(kind, p, nullptr); }

double FamilyModel::value_and_gradient(ScoreKind kind, const ScoreParams& p, Eigen::Vector3d& grad) const {
    return evaluate(kind, p, &grad);
}

double FamilyModel::evaluate(ScoreKind kind, const ScoreParams& p, Eigen::Vector3d* grad) const {
    if (!(p.sigma_x > 0.0 && p.sigma_p > 0.0 && p.sigma_eps > 0.0)) {
        throw std::invalid_argument("score parameters must be positive");
    }
    const double n = n_;
    const Eigen::MatrixXd kp = parent_kernel(p.sigma_p);
    Eigen::MatrixXd ktheta = kp;
    ktheta.diagonal().array() += p.sigma_eps * p.sigma_eps;
    const JitteredCholesky chol(ktheta);

    // The response: kernel features (ours, marg) or the raw target values (gp).
    const bool feature_space = kind != ScoreKind::gp;
    const Eigen::MatrixXd kx = feature_space ? target_kernel(p.sigma_x) : Eigen::MatrixXd();
    const Eigen::MatrixXd& response = feature_space ? kx : target_;
    const double columns = static_cast<double>(response.cols());

    double value;
    if (!grad) {
        const Eigen::MatrixXd w = chol.llt().matrixL().solve(response);
        value = -0.5 * w.squaredNorm() - 0.5 * columns * chol.logdet() - 0.5 * n * columns * kLog2Pi;
        if (kind == ScoreKind::ours) {
            if (jac_pairs_ == 0.0) throw DegenerateDataError("all target samples are identical");
            value += jacobian(p.sigma_x);
        }
        return value;
    }

    const Eigen::MatrixXd a = chol.solve(Eigen::MatrixXd::Identity(n_, n_));
    const Eigen::MatrixXd b = a * response;  // K_theta^{-1} response
    value = -0.5 * response.cwiseProduct(b).sum() - 0.5 * columns * chol.logdet() -
            0.5 * n * columns * kLog2Pi;

    // dS/dK_theta
    Eigen::MatrixXd g = 0.5 * b * b.transpose();
    g -= 0.5 * columns * a;

    grad->setZero();
    if (kind == ScoreKind::ours) {
        if (jac_pairs_ == 0.0) throw DegenerateDataError("all target samples are identical");
        value += jacobian(p.sigma_x);
        const double s3 = p.sigma_x * p.sigma_x * p.sigma_x;
        const double trace_part = -(kx.array() * d2_target_.array() * b.array()).sum() / s3;
        const double jac_part = jac_sum_sq_dist_ / s3 - 2.0 * jac_pairs_ / p.sigma_x;
        (*grad)(0) = trace_part + jac_part;
    }
    if (has_parents_) {
        const double s3 = p.sigma_p * p.sigma_p * p.sigma_p;
        (*grad)(1) = (g.array() * kp.array() * d2_parents_.array()).sum() / s3;
    }
    (*grad)(2) = 2.0 * p.sigma_eps * g.trace();
    return value;
}

double joint_marginal_score(const Dataset& data, int target, std::span<const int> parents,
                            const ScoreParams& params, const ScoreOptions& opts) {
    return local_score_value(data, target, parents, ScoreKind::ours, params, opts);
}

double local_score_value(const Dataset& data, int target, std::span<const int> parents, ScoreKind kind,
                         const ScoreParams& params, const ScoreOptions& opts) {
    const FamilyModel model(data, target, parents, opts.root);
    return model.value(kind, params);
}

Eigen::Vector3d score_gradient(const Dataset& data, int target, std::span<const int> parents,
                               const ScoreParams& params, ScoreKind kind, const ScoreOptions& opts) {
    const FamilyModel model(data, target, parents, opts.root);
    Eigen::Vector3d grad;
    model.value_and_gradient(kind, params, grad);
    return grad;
}

ScoreParams initial_params(const FamilyModel& model, const ScoreOptions& opts) {
    ScoreParams p;
    p.sigma_x = model.target_bandwidth().value;
    p.sigma_p = model.has_parents() ? model.parent_bandwidth().value : 1.0;
    p.sigma_eps = opts.sigma_eps_init;
    return p;
}

LocalScoreResult optimize_local_score(const Dataset& data, int target, std::span<const int> parents,
                                      ScoreKind kind, const ScoreOptions& opts) {
    const FamilyModel model(data, target, parents, opts.root);
    const ScoreParams init = initial_params(model, opts);

    // Free coordinates: index into (sigma_x, sigma_p, sigma_eps).
    std::vector<int> free;
    if (kind == ScoreKind::ours) free.push_back(0);
    if (model.has_parents()) free.push_back(1);
    free.push_back(2);
    const ParamBox boxes[3] = {kSigmaXBox, kSigmaPBox, kSigmaEpsBox};

    auto unpack = [&](const Eigen::VectorXd& u) {
        ScoreParams p = init;
        double* fields[3] = {&p.sigma_x, &p.sigma_p, &p.sigma_eps};
        for (std::size_t k = 0; k < free.size(); ++k) *fields[free[k]] = to_box(u(k), boxes[free[k]]);
        return p;
    };

    Eigen::VectorXd u0(free.size());
    {
        const double init_vals[3] = {init.sigma_x, init.sigma_p, init.sigma_eps};
        for (std::size_t k = 0; k < free.size(); ++k) u0(k) = from_box(init_vals[free[k]], boxes[free[k]]);
    }

    const Objective objective = [&](const Eigen::VectorXd& u, Eigen::VectorXd& gu) {
        const ScoreParams p = unpack(u);
        Eigen::Vector3d g;
        double s;
        try {
            s = model.value_and_gradient(kind, p, g);
        } catch (const NotPositiveDefiniteError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        gu.resize(static_cast<Eigen::Index>(free.size()));
        for (std::size_t k = 0; k < free.size(); ++k) {
            gu(k) = -g(free[k]) * box_slope(u(k), boxes[free[k]]);
        }
        return -s;
    };

    const LbfgsResult opt = lbfgs_minimize(objective, u0, opts.optimizer);

    LocalScoreResult res;
    res.params = unpack(opt.x);
    res.value = -opt.value;
    res.iterations = opt.iterations;
    res.evaluations = opt.evaluations;
    res.converged = opt.converged && !opt.diverged;
    res.gradient_norm = opt.gradient.norm();
    res.degenerate_pairs = kind == ScoreKind::ours ? model.degenerate_pairs() : 0;
    return res;
}

LocalScoreResult baseline_marg_score(const Dataset& data, int target, std::span<const int> parents,
                                     const ScoreOptions& opts) {
    return optimize_local_score(data, target, parents, ScoreKind::marg, opts);
}

LocalScoreResult baseline_gp_score(const Dataset& data, int target, std::span<const int> parents,
                                   const ScoreOptions& opts) {
    return optimize_local_score(data, target, parents, ScoreKind::gp, opts);
}

Eigen::MatrixXd feature_residuals(const Dataset& data, int target, std::span<const int> parents,
                                  const ScoreParams& params, const ScoreOptions& opts) {
    const FamilyModel model(data, target, parents, opts.root);
    const Eigen::MatrixXd kx = model.target_kernel(params.sigma_x);
    const Eigen::MatrixXd kp = model.parent_kernel(params.sigma_p);
    Eigen::MatrixXd ktheta = kp;
    ktheta.diagonal().array() += params.sigma_eps * params.sigma_eps;
    const JitteredCholesky chol(ktheta);
    return kx - kp * chol.solve(kx);
}

ScoreCache::Key ScoreCache::make_key(int target, std::span<const int> parents, ScoreKind kind) {
    Key key{target, std::vector<int>(parents.begin(), parents.end()), kind};
    std::sort(key.parents.begin(), key.parents.end());
    key.parents.erase(std::unique(key.parents.begin(), key.parents.end()), key.parents.end());
    return key;
}

std::optional<LocalScoreResult> ScoreCache::find(const Key& key) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ScoreCache::insert(const Key& key, const LocalScoreResult& result) {
    std::unique_lock lock(mutex_);
    entries_.insert_or_assign(key, result);
}

std::size_t ScoreCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::map<ScoreCache::Key, LocalScoreResult> ScoreCache::snapshot() const {
    std::shared_lock lock(mutex_);
    return entries_;
}

KernelScorer::KernelScorer(const Dataset& data, ScoreKind kind, std::shared_ptr<ScoreCache> cache,
                           ScoreOptions opts)
    : data_(standardized(data)),
      kind_(kind),
      cache_(cache ? std::move(cache) : std::make_shared<ScoreCache>()),
      opts_(opts) {}

LocalScoreResult KernelScorer::family(int target, std::span<const int> parents) {
    const auto key = ScoreCache::make_key(target, parents, kind_);
    if (auto hit = cache_->find(key)) return *hit;
    LocalScoreResult res;
    try {
        res = optimize_local_score(data_, target, key.parents, kind_, opts_);
    } catch (const std::exception& e) {
        std::string fam = data_.variable(target).name + " | {";
        for (std::size_t k = 0; k < key.parents.size(); ++k) {
            fam += (k ? "," : "") + data_.variable(key.parents[k]).name;
        }
        throw std::runtime_error("scoring family " + fam + "} failed: " + e.what());
    }
    ++optimizations_;
    cache_->insert(key, res);
    return res;
}

double KernelScorer::local_score(int target, const std::vector<int>& parents) {
    return family(target, parents).value;
}

bool KernelScorer::is_cached(int target, const std::vector<int>& parents) const {
    return cache_->find(ScoreCache::make_key(target, parents, kind_)).has_value();
}

double graph_score(LocalScorer& scorer, const Dag& dag) {
    if (dag.size() != scorer.num_variables()) {
        throw std::invalid_argument("graph and dataset have different variable counts");
    }
    double total = 0.0;
    for (int v = 0; v < dag.size(); ++v) total += scorer.local_score(v, dag.parents(v));
    return total;
}

double graph_score(const Dataset& data, const Dag& dag, ScoreKind kind, std::shared_ptr<ScoreCache> cache) {
    KernelScorer scorer(data, kind, std::move(cache));
    return graph_score(scorer, dag);
}

}  // namespace kcdisc
