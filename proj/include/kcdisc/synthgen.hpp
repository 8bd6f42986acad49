#pragma once

#include "kcdisc/dataset.hpp"
#include "kcdisc/graph.hpp"
#include "kcdisc/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kcdisc {

enum class DataKind { continuous, mixed, discrete, multidim };
std::string to_string(DataKind kind);
DataKind parse_data_kind(const std::string& s);

struct GenConfig {
    int num_vars = 8;
    double density = 0.5;
    int n = 200;
    DataKind kind = DataKind::continuous;
    // Fraction of variables discretized; only read for mixed data (discrete uses 1).
    double discrete_ratio = 0.5;
    std::uint64_t seed = 0;
};

// Throws std::invalid_argument describing the first bad field.
void validate(const GenConfig& config);

enum class FnKind { linear, sin, cos, tanh, exp, power };
std::string to_string(FnKind kind);

// linear: w * x with w in {0.5, 2.5}; power: x^alpha with alpha in {1, 2, 3}.
struct Transform {
    FnKind kind = FnKind::linear;
    double param = 1.0;
};
double apply(const Transform& t, double x);

enum class NoiseKind { gaussian, uniform };
std::string to_string(NoiseKind kind);

// gaussian: N(0, scale^2); uniform: U(-scale, scale).
struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian;
    double scale = 0.5;
};

struct Mechanism {
    Transform f;
    Transform g;
    NoiseSpec noise;
};

Mechanism sample_mechanism(Rng& rng);

// Per-variable record. Roots carry their source distribution in `noise`
// (N(0, 1) or U(-1, 1)); non-roots carry the mechanism and the affine map that
// standardized the generated column.
struct VariableTruth {
    bool root = true;
    int dim = 1;
    Mechanism mechanism;
    std::vector<double> shift;
    std::vector<double> scale;
    bool discrete = false;
    int range_lo = 0;
    int range_hi = 0;
};

struct GroundTruth {
    Dag dag;
    std::vector<VariableTruth> vars;
    std::uint64_t seed = 0;
    std::string rng = Rng::kAlgorithm;
    // Non-empty for fixed-structure datasets whose mechanisms are not drawn
    // from the random menu.
    std::string preset;
};

inline constexpr const char* kChainPreset = "cos2-chain";

struct Generated {
    Dataset data;
    GroundTruth truth;
    // Continuous values before discretization, grouped like the dataset columns.
    Eigen::MatrixXd latent;
    // Noise draws per variable (n x dim); for roots, the source samples.
    std::vector<Eigen::MatrixXd> noise;
};

Dag random_dag(int q, double density, Rng& rng);
int edge_count(int q, double density);

Generated generate(const GenConfig& config);

// Recomputes variable v's latent block from its parents' latent values and the
// recorded noise, exactly as generation did.
Eigen::MatrixXd regenerate_variable(const Generated& gen, int v);

// Equal-frequency binning onto 1..bins: thresholds t_k = sorted[floor(k n / bins)],
// code = 1 + #{k : x >= t_k}.
Eigen::VectorXd quantile_discretize(const Eigen::VectorXd& x, int bins);

// Z -> Y -> X with Z ~ N(0, 1), Y = cos(1.5 Z^2 + e)^2, X = cos(1.5 Y^2 + e)^2,
// e ~ N(0, 0.5^2). Columns are ordered Z, Y, X.
Generated generate_chain(int n, std::uint64_t seed);

}  // namespace kcdisc
