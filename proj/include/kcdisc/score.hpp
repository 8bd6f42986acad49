#pragma once

#include "kcdisc/dataset.hpp"
#include "kcdisc/kernels.hpp"
#include "kcdisc/lbfgs.hpp"

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kcdisc {

class Dag;

// ours: joint marginal likelihood with the Jacobian-volume term and a
// trainable response kernel. marg: the same likelihood without the Jacobian
// term and with sigma_x pinned to the median heuristic. gp: conditional
// marginal likelihood of the raw target values.
enum class ScoreKind { ours, marg, gp };

std::string to_string(ScoreKind kind);
ScoreKind parse_score_kind(const std::string& s);

// Parent kernel used for a family with no parents. `constant` is the Gaussian
// kernel evaluated on a zero-dimensional input (K_PA = 11'); `zero` drops the
// regression function entirely (K_PA = 0).
enum class RootKernel { constant, zero };

struct ScoreParams {
    double sigma_x = 1.0;
    double sigma_p = 1.0;
    double sigma_eps = 0.1;
};

struct ParamBox {
    double lo;
    double hi;
};
inline constexpr ParamBox kSigmaXBox{0.1, 10.0};
inline constexpr ParamBox kSigmaPBox{0.1, 10.0};
inline constexpr ParamBox kSigmaEpsBox{0.001, 10.0};

bool within_bounds(const ScoreParams& p);

class DegenerateDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScoreOptions {
    RootKernel root = RootKernel::constant;
    double sigma_eps_init = 0.1;
    LbfgsOptions optimizer{};
};

struct LocalScoreResult {
    double value = 0.0;
    ScoreParams params;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    double gradient_norm = 0.0;
    // Duplicate-sample pairs floored in the Jacobian term (ours only).
    int degenerate_pairs = 0;
};

// Log-volume of the Jacobian summed over ordered pairs i != j. Pairs of
// identical samples contribute log(1e-10) each and are counted.
struct JacobianTerm {
    double value = 0.0;
    int degenerate_pairs = 0;
};
inline constexpr double kDuplicatePairFloor = 1e-10;

JacobianTerm jacobian_term(const SampleBlock& target_block, double sigma_x);

// Precomputed pairwise geometry of one (target, parents) family. All score
// kinds evaluate against it; the dataset is used as given (no standardization).
class FamilyModel {
public:
    FamilyModel(const Dataset& data, int target, std::span<const int> parents,
                RootKernel root = RootKernel::constant);

    int num_samples() const { return n_; }
    bool has_parents() const { return has_parents_; }
    const Bandwidth& target_bandwidth() const { return target_bw_; }
    const Bandwidth& parent_bandwidth() const { return parent_bw_; }
    int degenerate_pairs() const { return degenerate_pairs_; }

    double value(ScoreKind kind, const ScoreParams& p) const;
    // Returns the score and writes d(score)/d(sigma_x, sigma_p, sigma_eps).
    double value_and_gradient(ScoreKind kind, const ScoreParams& p, Eigen::Vector3d& grad) const;

    double jacobian(double sigma_x) const;
    Eigen::MatrixXd target_kernel(double sigma_x) const;
    Eigen::MatrixXd parent_kernel(double sigma_p) const;

private:
    double evaluate(ScoreKind kind, const ScoreParams& p, Eigen::Vector3d* grad) const;

    int n_ = 0;
    bool has_parents_ = false;
    RootKernel root_ = RootKernel::constant;
    Eigen::MatrixXd target_;
    Eigen::MatrixXd d2_target_;
    Eigen::MatrixXd d2_parents_;
    Bandwidth target_bw_;
    Bandwidth parent_bw_;
    // Jacobian term pieces over non-duplicate ordered pairs.
    double jac_sum_log_dist_ = 0.0;
    double jac_sum_sq_dist_ = 0.0;
    double jac_pairs_ = 0.0;
    int degenerate_pairs_ = 0;
};

// S(X, PA) for the trainable-kernel joint likelihood at fixed parameters.
double joint_marginal_score(const Dataset& data, int target, std::span<const int> parents,
                            const ScoreParams& params, const ScoreOptions& opts = {});

double local_score_value(const Dataset& data, int target, std::span<const int> parents,
                         ScoreKind kind, const ScoreParams& params, const ScoreOptions& opts = {});

// Analytic gradient with respect to (sigma_x, sigma_p, sigma_eps).
Eigen::Vector3d score_gradient(const Dataset& data, int target, std::span<const int> parents,
                               const ScoreParams& params, ScoreKind kind = ScoreKind::ours,
                               const ScoreOptions& opts = {});

// Maximizes the selected score over the parameter box. Box constraints are
// handled by a logistic map from unconstrained coordinates.
LocalScoreResult optimize_local_score(const Dataset& data, int target, std::span<const int> parents,
                                      ScoreKind kind, const ScoreOptions& opts = {});

LocalScoreResult baseline_marg_score(const Dataset& data, int target, std::span<const int> parents,
                                     const ScoreOptions& opts = {});
LocalScoreResult baseline_gp_score(const Dataset& data, int target, std::span<const int> parents,
                                   const ScoreOptions& opts = {});

// Starting point of the optimizer for a family: median-heuristic bandwidths
// and sigma_eps_init.
ScoreParams initial_params(const FamilyModel& model, const ScoreOptions& opts = {});

// Estimated noise in feature space, K_X - K_PA (K_PA + s_eps^2 I)^{-1} K_X.
// Column i is the i-th feature dimension over all samples.
Eigen::MatrixXd feature_residuals(const Dataset& data, int target, std::span<const int> parents,
                                  const ScoreParams& params, const ScoreOptions& opts = {});

// Thread-safe map from (target, sorted parents, kind) to optimized results.
class ScoreCache {
public:
    struct Key {
        int target;
        std::vector<int> parents;
        ScoreKind kind;
        auto operator<=>(const Key&) const = default;
    };
    static Key make_key(int target, std::span<const int> parents, ScoreKind kind);

    std::optional<LocalScoreResult> find(const Key& key) const;
    void insert(const Key& key, const LocalScoreResult& result);
    std::size_t size() const;
    std::map<Key, LocalScoreResult> snapshot() const;

private:
    mutable std::shared_mutex mutex_;
    std::map<Key, LocalScoreResult> entries_;
};

// Decomposable scoring backend consumed by the search.
class LocalScorer {
public:
    virtual ~LocalScorer() = default;
    virtual int num_variables() const = 0;
    // Must be safe to call concurrently; `parents` is sorted ascending.
    virtual double local_score(int target, const std::vector<int>& parents) = 0;
    virtual bool is_cached(int /*target*/, const std::vector<int>& /*parents*/) const { return false; }
};

// Kernel score over a standardized copy of the dataset, memoized in a cache.
class KernelScorer final : public LocalScorer {
public:
    KernelScorer(const Dataset& data, ScoreKind kind, std::shared_ptr<ScoreCache> cache = nullptr,
                 ScoreOptions opts = {});

    int num_variables() const override { return data_.num_variables(); }
    double local_score(int target, const std::vector<int>& parents) override;
    bool is_cached(int target, const std::vector<int>& parents) const override;

    LocalScoreResult family(int target, std::span<const int> parents);

    ScoreKind kind() const { return kind_; }
    const Dataset& data() const { return data_; }
    const ScoreCache& cache() const { return *cache_; }
    std::size_t optimizations() const { return optimizations_.load(); }

private:
    Dataset data_;
    ScoreKind kind_;
    std::shared_ptr<ScoreCache> cache_;
    ScoreOptions opts_;
    std::atomic<std::size_t> optimizations_{0};
};

// Sum of local family scores of a DAG.
double graph_score(LocalScorer& scorer, const Dag& dag);
double graph_score(const Dataset& data, const Dag& dag, ScoreKind kind, std::shared_ptr<ScoreCache> cache);

}  // namespace kcdisc
