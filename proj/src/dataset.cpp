#include "kcdisc/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace kcdisc {

Dataset::Dataset(Eigen::MatrixXd values, std::vector<Variable> variables)
    : values_(std::move(values)), variables_(std::move(variables)) {
    int offset = 0;
    offsets_.reserve(variables_.size());
    for (const auto& v : variables_) {
        if (v.dim < 1) throw std::invalid_argument("variable '" + v.name + "' has dimension < 1");
        offsets_.push_back(offset);
        offset += v.dim;
    }
    if (offset != values_.cols()) {
        throw std::invalid_argument("dataset has " + std::to_string(values_.cols()) +
                                    " columns but variables declare " + std::to_string(offset));
    }
    if (!values_.allFinite()) throw std::invalid_argument("dataset contains non-finite values");
}

int Dataset::index_of(const std::string& name) const {
    for (int v = 0; v < num_variables(); ++v) {
        if (variables_[v].name == name) return v;
    }
    throw std::invalid_argument("unknown variable '" + name + "'");
}

Eigen::MatrixXd Dataset::block(int v) const {
    return values_.middleCols(offset(v), variables_.at(v).dim);
}

Eigen::MatrixXd Dataset::block(std::span<const int> vars) const {
    int cols = 0;
    for (int v : vars) cols += variables_.at(v).dim;
    Eigen::MatrixXd out(values_.rows(), cols);
    int c = 0;
    for (int v : vars) {
        const int d = variables_[v].dim;
        out.middleCols(c, d) = values_.middleCols(offsets_[v], d);
        c += d;
    }
    return out;
}

Dataset Dataset::permuted(std::span<const int> perm) const {
    if (static_cast<int>(perm.size()) != num_samples()) {
        throw std::invalid_argument("permutation length does not match sample count");
    }
    Eigen::MatrixXd out(values_.rows(), values_.cols());
    for (int i = 0; i < num_samples(); ++i) out.row(i) = values_.row(perm[i]);
    return Dataset(std::move(out), variables_);
}

Dataset standardized(const Dataset& data) {
    Eigen::MatrixXd values = data.values();
    const double n = static_cast<double>(values.rows());
    for (int v = 0; v < data.num_variables(); ++v) {
        if (data.variable(v).type == VarType::discrete) continue;
        for (int c = data.offset(v); c < data.offset(v) + data.variable(v).dim; ++c) {
            auto col = values.col(c);
            const double mean = col.mean();
            col.array() -= mean;
            const double sd = std::sqrt(col.squaredNorm() / n);
            if (sd > 1e-12) col /= sd;
        }
    }
    return Dataset(std::move(values), data.variables());
}

}  // namespace kcdisc
