#pragma once

// Linear-Gaussian BIC family score. Cheap and score-equivalent, so search
// tests can run many graphs quickly.

#include "kcdisc/score.hpp"

#include <atomic>
#include <cmath>

class BicScorer final : public kcdisc::LocalScorer {
public:
    explicit BicScorer(const Eigen::MatrixXd& x) : x_(x) {}

    int num_variables() const override { return static_cast<int>(x_.cols()); }

    double local_score(int target, const std::vector<int>& parents) override {
        ++calls_;
        const Eigen::Index n = x_.rows();
        Eigen::MatrixXd design(n, static_cast<Eigen::Index>(parents.size()) + 1);
        design.col(0).setOnes();
        for (std::size_t k = 0; k < parents.size(); ++k) design.col(static_cast<Eigen::Index>(k) + 1) = x_.col(parents[k]);
        const Eigen::VectorXd y = x_.col(target);
        const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(y);
        const double rss = (y - design * beta).squaredNorm();
        const double dn = static_cast<double>(n);
        return -0.5 * dn * std::log(rss / dn) - 0.5 * static_cast<double>(design.cols()) * std::log(dn);
    }

    long calls() const { return calls_.load(); }

private:
    Eigen::MatrixXd x_;
    std::atomic<long> calls_{0};
};
