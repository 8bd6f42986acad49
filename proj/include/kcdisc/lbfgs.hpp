#pragma once

#include <Eigen/Dense>

#include <functional>

namespace kcdisc {

// Returns f(x) and writes the gradient into `grad`. A non-finite return value
// marks x as infeasible; the line search then backtracks.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsOptions {
    int max_iterations = 1000;
    int history = 10;
    double gradient_tolerance = 1e-5;
    // Stop when |f_prev - f| <= tolerance_change * max(1, |f|).
    double tolerance_change = 1e-12;
    int max_line_search = 30;
    double armijo = 1e-4;
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    // Set when the line search could not find a finite point and the
    // optimizer fell back to the last finite iterate.
    bool diverged = false;
};

// Unconstrained limited-memory BFGS minimizer with a backtracking Armijo line
// search. The curvature pair of a step is dropped when s'y <= 0.
LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& opts = {});

}  // namespace kcdisc
