#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace kcdisc {

// Rows of a sample block are samples, columns are the dimensions of one
// variable (or of a stacked parent set).
using SampleBlock = Eigen::Ref<const Eigen::MatrixXd>;

inline constexpr double kBandwidthMin = 0.1;
inline constexpr double kBandwidthMax = 10.0;

class NotPositiveDefiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// k(u, v) = exp(-|u - v|^2 / (2 sigma^2))
double gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& u,
                       const Eigen::Ref<const Eigen::VectorXd>& v, double sigma);

// Pairwise squared Euclidean distances between rows, n x n. A block with zero
// columns yields the zero matrix.
Eigen::MatrixXd squared_distances(const SampleBlock& block);

Eigen::MatrixXd kernel_from_sq_distances(const Eigen::MatrixXd& sq_dist, double sigma);
Eigen::MatrixXd kernel_matrix(const SampleBlock& block, double sigma);

// Gradient of k(x^j, x^i) with respect to x^j (0-based sample indices).
Eigen::VectorXd kernel_derivative(const SampleBlock& block, double sigma, int j, int i);

// Median of the n(n-1)/2 pairwise distances between rows.
double median_distance(const SampleBlock& block);

struct Bandwidth {
    double value = kBandwidthMin;
    bool degenerate = false;
    // 2 * median distance before clamping into [kBandwidthMin, kBandwidthMax].
    double raw = 0.0;
};

// Twice the median pairwise distance, clamped into the optimizer box. All
// samples identical gives the lower bound with `degenerate` set.
Bandwidth median_heuristic(const SampleBlock& block);

// Cholesky factorization with escalating diagonal jitter: first attempt is
// exact, then eps = 1e-8 * mean(diag), x10 per retry up to 1e-2 * mean(diag).
class JitteredCholesky {
public:
    explicit JitteredCholesky(const Eigen::MatrixXd& k);

    const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }
    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return llt_.solve(rhs); }
    // log|K + jitter I|
    double logdet() const { return logdet_; }
    double jitter() const { return jitter_; }

private:
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double logdet_ = 0.0;
    double jitter_ = 0.0;
};

struct CholSolveResult {
    Eigen::MatrixXd solution;
    double logdet = 0.0;
    double jitter = 0.0;
};

CholSolveResult chol_solve_logdet(const Eigen::MatrixXd& k, const Eigen::MatrixXd& rhs);

}  // namespace kcdisc
