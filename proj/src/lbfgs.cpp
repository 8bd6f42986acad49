#include "kcdisc/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace kcdisc {

namespace {

struct CurvaturePair {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double rho;
};

Eigen::VectorXd two_loop_direction(const Eigen::VectorXd& grad, const std::deque<CurvaturePair>& mem) {
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(mem.size());
    for (std::size_t k = mem.size(); k-- > 0;) {
        alpha[k] = mem[k].rho * mem[k].s.dot(q);
        q -= alpha[k] * mem[k].y;
    }
    if (!mem.empty()) {
        const auto& last = mem.back();
        q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t k = 0; k < mem.size(); ++k) {
        const double beta = mem[k].rho * mem[k].y.dot(q);
        q += (alpha[k] - beta) * mem[k].s;
    }
    return -q;
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& opts) {
    LbfgsResult res;
    res.x = std::move(x0);
    res.gradient = Eigen::VectorXd::Zero(res.x.size());
    res.value = f(res.x, res.gradient);
    res.evaluations = 1;
    if (!std::isfinite(res.value) || !res.gradient.allFinite()) {
        throw std::runtime_error("objective is not finite at the starting point");
    }

    std::deque<CurvaturePair> mem;
    Eigen::VectorXd trial_grad(res.x.size());

    for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
        if (res.gradient.norm() <= opts.gradient_tolerance) {
            res.converged = true;
            return res;
        }

        Eigen::VectorXd dir = two_loop_direction(res.gradient, mem);
        double slope = res.gradient.dot(dir);
        if (!(slope < 0.0)) {
            // Memory produced an ascent direction; restart from steepest descent.
            mem.clear();
            dir = -res.gradient;
            slope = -res.gradient.squaredNorm();
        }

        double step = 1.0;
        if (mem.empty()) step = std::min(1.0, 1.0 / res.gradient.lpNorm<1>());

        bool accepted = false;
        double trial_value = 0.0;
        Eigen::VectorXd trial_x;
        for (int ls = 0; ls < opts.max_line_search; ++ls) {
            trial_x = res.x + step * dir;
            trial_value = f(trial_x, trial_grad);
            ++res.evaluations;
            const bool finite = std::isfinite(trial_value) && trial_grad.allFinite();
            if (finite && trial_value <= res.value + opts.armijo * step * slope) {
                accepted = true;
                break;
            }
            if (!finite) {
                res.diverged = true;
                step *= 0.1;
                continue;
            }
            // Minimizer of the quadratic through f(0), f'(0) and f(step), safeguarded.
            const double denom = 2.0 * (trial_value - res.value - slope * step);
            double next = denom > 0.0 ? -slope * step * step / denom : 0.5 * step;
            step = std::clamp(next, 0.1 * step, 0.5 * step);
        }
        if (!accepted) {
            // No progress possible along this direction: either we sit at the
            // resolution limit of f or the surface is non-finite nearby.
            res.converged = !res.diverged && res.gradient.norm() <= 1e-3 * std::max(1.0, std::abs(res.value));
            return res;
        }
        res.diverged = false;

        const Eigen::VectorXd s = trial_x - res.x;
        const Eigen::VectorXd y = trial_grad - res.gradient;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
            mem.push_back({s, y, 1.0 / sy});
            if (static_cast<int>(mem.size()) > opts.history) mem.pop_front();
        }

        const double prev = res.value;
        res.x = std::move(trial_x);
        res.value = trial_value;
        res.gradient = trial_grad;

        if (std::abs(prev - res.value) <= opts.tolerance_change * std::max(1.0, std::abs(res.value))) {
            ++res.iterations;
            res.converged = true;
            return res;
        }
    }
    res.converged = res.gradient.norm() <= opts.gradient_tolerance;
    return res;
}

}  // namespace kcdisc
