#pragma once

#include "kcdisc/dataset.hpp"
#include "kcdisc/rng.hpp"

#include <string>
#include <vector>

namespace testutil {

// q variables with the given dimensions, entries N(0, 1) from `rng`.
inline kcdisc::Dataset random_dataset(kcdisc::Rng& rng, int n, const std::vector<int>& dims) {
    std::vector<kcdisc::Variable> vars;
    int total = 0;
    for (std::size_t v = 0; v < dims.size(); ++v) {
        vars.push_back({"V" + std::to_string(v), dims[v], kcdisc::VarType::continuous, 0, 0});
        total += dims[v];
    }
    Eigen::MatrixXd x(n, total);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < total; ++c) x(i, c) = rng.normal();
    }
    return kcdisc::Dataset(std::move(x), std::move(vars));
}

inline kcdisc::Dataset columns_dataset(const Eigen::MatrixXd& x) {
    std::vector<kcdisc::Variable> vars;
    for (Eigen::Index c = 0; c < x.cols(); ++c) vars.push_back({"V" + std::to_string(c)});
    return kcdisc::Dataset(x, std::move(vars));
}

}  // namespace testutil
