#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace kcdisc {

enum class VarType { continuous, discrete };

struct Variable {
    std::string name;
    int dim = 1;
    VarType type = VarType::continuous;
    // Inclusive integer range of a discrete variable; unused for continuous ones.
    int range_lo = 0;
    int range_hi = 0;
};

// Column-grouped sample matrix. Row i holds sample i; variable v occupies
// columns [offset(v), offset(v) + dim(v)).
class Dataset {
public:
    Dataset() = default;
    Dataset(Eigen::MatrixXd values, std::vector<Variable> variables);

    int num_samples() const { return static_cast<int>(values_.rows()); }
    int num_variables() const { return static_cast<int>(variables_.size()); }
    int total_dim() const { return static_cast<int>(values_.cols()); }

    const Variable& variable(int v) const { return variables_.at(v); }
    const std::vector<Variable>& variables() const { return variables_; }
    int offset(int v) const { return offsets_.at(v); }
    int index_of(const std::string& name) const;

    const Eigen::MatrixXd& values() const { return values_; }

    // n x dim(v) block of one variable.
    Eigen::MatrixXd block(int v) const;
    // Parent blocks stacked side by side in the given order; n x 0 when empty.
    Eigen::MatrixXd block(std::span<const int> vars) const;

    // Rows reordered so that row i of the result is row perm[i] of this dataset.
    Dataset permuted(std::span<const int> perm) const;

private:
    Eigen::MatrixXd values_;
    std::vector<Variable> variables_;
    std::vector<int> offsets_;
};

// Shifts and scales every continuous column to zero mean and unit variance
// (population variance). Discrete columns keep their integer codes; constant
// continuous columns are only centred.
Dataset standardized(const Dataset& data);

}  // namespace kcdisc
