#include "kcdisc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace kcdisc {

namespace {

void check_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("kernel bandwidth must be positive, got " + std::to_string(sigma));
    }
}

}  // namespace

double gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& u,
                       const Eigen::Ref<const Eigen::VectorXd>& v, double sigma) {
    if (u.size() != v.size()) throw std::invalid_argument("gaussian_kernel: dimension mismatch");
    check_sigma(sigma);
    return std::exp(-(u - v).squaredNorm() / (2.0 * sigma * sigma));
}

Eigen::MatrixXd squared_distances(const SampleBlock& block) {
    const Eigen::Index n = block.rows();
    Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, n);
    if (block.cols() == 0) return d2;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double s = (block.row(i) - block.row(j)).squaredNorm();
            d2(i, j) = s;
            d2(j, i) = s;
        }
    }
    return d2;
}

Eigen::MatrixXd kernel_from_sq_distances(const Eigen::MatrixXd& sq_dist, double sigma) {
    check_sigma(sigma);
    const double scale = -1.0 / (2.0 * sigma * sigma);
    return (sq_dist.array() * scale).exp().matrix();
}

Eigen::MatrixXd kernel_matrix(const SampleBlock& block, double sigma) {
    check_sigma(sigma);
    if (block.rows() == 0) throw std::invalid_argument("kernel_matrix: empty block");
    return kernel_from_sq_distances(squared_distances(block), sigma);
}

Eigen::VectorXd kernel_derivative(const SampleBlock& block, double sigma, int j, int i) {
    check_sigma(sigma);
    const auto n = static_cast<int>(block.rows());
    if (j < 0 || j >= n || i < 0 || i >= n) {
        throw std::out_of_range("kernel_derivative: sample index out of range");
    }
    const Eigen::VectorXd diff = (block.row(i) - block.row(j)).transpose();
    const double k = std::exp(-diff.squaredNorm() / (2.0 * sigma * sigma));
    return k * diff / (sigma * sigma);
}

double median_distance(const SampleBlock& block) {
    const Eigen::Index n = block.rows();
    if (n < 2) throw std::invalid_argument("median_distance needs at least two samples");
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j + 1; i < n; ++i) {
            dist.push_back((block.row(i) - block.row(j)).norm());
        }
    }
    // Even count: mean of the two middle order statistics.
    const std::size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
    const double upper = dist[mid];
    if (dist.size() % 2 == 1) return upper;
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

Bandwidth median_heuristic(const SampleBlock& block) {
    Bandwidth bw;
    const double med = median_distance(block);
    bw.raw = 2.0 * med;
    if (!(med > 0.0)) {
        bw.degenerate = true;
        bw.value = kBandwidthMin;
        return bw;
    }
    bw.value = std::clamp(bw.raw, kBandwidthMin, kBandwidthMax);
    return bw;
}

JitteredCholesky::JitteredCholesky(const Eigen::MatrixXd& k) {
    if (k.rows() != k.cols()) throw std::invalid_argument("Cholesky of a non-square matrix");
    const double mean_diag = k.rows() > 0 ? k.diagonal().mean() : 1.0;
    const double base = std::abs(mean_diag) > 0.0 ? std::abs(mean_diag) : 1.0;

    llt_.compute(k);
    if (llt_.info() == Eigen::Success && llt_.matrixLLT().diagonal().minCoeff() > 0.0) {
        jitter_ = 0.0;
    } else {
        bool ok = false;
        for (double eps = 1e-8; eps <= 1e-2 * 1.0000001; eps *= 10.0) {
            Eigen::MatrixXd kj = k;
            kj.diagonal().array() += eps * base;
            llt_.compute(kj);
            if (llt_.info() == Eigen::Success && llt_.matrixLLT().diagonal().minCoeff() > 0.0) {
                jitter_ = eps * base;
                ok = true;
                break;
            }
        }
        if (!ok) throw NotPositiveDefiniteError("matrix is not positive definite after jitter escalation");
    }
    logdet_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

CholSolveResult chol_solve_logdet(const Eigen::MatrixXd& k, const Eigen::MatrixXd& rhs) {
    if (rhs.rows() != k.rows()) throw std::invalid_argument("chol_solve_logdet: rhs row mismatch");
    JitteredCholesky chol(k);
    return {chol.solve(rhs), chol.logdet(), chol.jitter()};
}

}  // namespace kcdisc
