#include "kcdisc/metrics.hpp"

#include <stdexcept>

namespace kcdisc {

namespace {

void check_same_size(int a, int b) {
    if (a != b) {
        throw std::invalid_argument("graphs have different node counts (" + std::to_string(a) + " vs " +
                                    std::to_string(b) + ")");
    }
}

}  // namespace

SkeletonScore skeleton_f1(const Cpdag& estimated, const Dag& truth) {
    check_same_size(estimated.size(), truth.size());
    const Pdag& t = truth.pdag();
    int predicted = 0;
    int actual = 0;
    int hits = 0;
    for (int a = 0; a < estimated.size(); ++a) {
        for (int b = a + 1; b < estimated.size(); ++b) {
            const bool e = estimated.adjacent(a, b);
            const bool r = t.adjacent(a, b);
            predicted += e;
            actual += r;
            hits += e && r;
        }
    }
    SkeletonScore s;
    s.precision = predicted > 0 ? static_cast<double>(hits) / predicted : 0.0;
    s.recall = actual > 0 ? static_cast<double>(hits) / actual : 0.0;
    if (s.precision + s.recall > 0.0) s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

ShdScore normalized_shd(const Cpdag& estimated, const Cpdag& truth) {
    check_same_size(estimated.size(), truth.size());
    const Pdag& e = estimated.pdag();
    const Pdag& t = truth.pdag();
    const int q = e.size();
    ShdScore s;
    for (int a = 0; a < q; ++a) {
        for (int b = a + 1; b < q; ++b) {
            const bool same = e.has_directed(a, b) == t.has_directed(a, b) &&
                              e.has_directed(b, a) == t.has_directed(b, a) &&
                              e.has_undirected(a, b) == t.has_undirected(a, b);
            s.shd += same ? 0 : 1;
        }
    }
    const int pairs = q * (q - 1) / 2;
    s.normalized = pairs > 0 ? static_cast<double>(s.shd) / pairs : 0.0;
    return s;
}

EvalReport evaluate(const Cpdag& estimated, const Dag& truth) {
    const auto sk = skeleton_f1(estimated, truth);
    const auto sh = normalized_shd(estimated, dag_to_cpdag(truth));
    return {sk.precision, sk.recall, sk.f1, sh.shd, sh.normalized, truth.size()};
}

double hsic_bandwidth(const SampleBlock& block) {
    const double m = median_distance(block);
    if (m <= 0.0) return 1.0;
    return std::max(m, kHsicBandwidthFloor);
}

double hsic_biased(const SampleBlock& a, const SampleBlock& b) {
    const Eigen::Index n = a.rows();
    if (b.rows() != n) throw std::invalid_argument("hsic: sample counts differ");
    if (n < 2) throw std::invalid_argument("hsic: need at least 2 samples");
    const Eigen::MatrixXd ka = kernel_matrix(a, hsic_bandwidth(a));
    Eigen::MatrixXd kb = kernel_matrix(b, hsic_bandwidth(b));
    // H K_b H by subtracting row and column means.
    const Eigen::VectorXd col_mean = kb.colwise().mean().transpose();
    const double total_mean = col_mean.mean();
    kb.rowwise() -= col_mean.transpose();
    kb.colwise() -= col_mean;
    kb.array() += total_mean;
    const double nn = static_cast<double>(n) * static_cast<double>(n);
    const double a_sym = (ka.array() * kb.array()).sum() / nn;
    // Evaluate the mirrored product too so the statistic is exactly symmetric.
    Eigen::MatrixXd kac = ka;
    const Eigen::VectorXd a_mean = kac.colwise().mean().transpose();
    const double a_total = a_mean.mean();
    kac.rowwise() -= a_mean.transpose();
    kac.colwise() -= a_mean;
    kac.array() += a_total;
    const Eigen::MatrixXd kbr = kernel_matrix(b, hsic_bandwidth(b));
    const double b_sym = (kbr.array() * kac.array()).sum() / nn;
    return 0.5 * (a_sym + b_sym);
}

double residual_hsic_diagnostic(const Dataset& data, int target, std::span<const int> parents, int candidate,
                                const ScoreParams& params, const ScoreOptions& opts) {
    if (candidate < 0 || candidate >= data.num_variables()) throw std::invalid_argument("candidate out of range");
    if (candidate == target) throw std::invalid_argument("candidate must differ from the target");
    for (int p : parents) {
        if (p == candidate) throw std::invalid_argument("candidate must not be one of the parents");
    }
    const Eigen::MatrixXd resid = feature_residuals(data, target, parents, params, opts);
    const Eigen::MatrixXd cand = data.block(candidate);
    double total = 0.0;
    for (Eigen::Index c = 0; c < resid.cols(); ++c) total += hsic_biased(resid.col(c), cand);
    return total / static_cast<double>(resid.cols());
}

}  // namespace kcdisc
