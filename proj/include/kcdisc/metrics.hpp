#pragma once

#include "kcdisc/dataset.hpp"
#include "kcdisc/graph.hpp"
#include "kcdisc/kernels.hpp"
#include "kcdisc/score.hpp"

#include <span>

namespace kcdisc {

struct SkeletonScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Adjacencies of `estimated` (directed or undirected) against the skeleton of
// `truth`. Precision with no predicted edges is 0.
SkeletonScore skeleton_f1(const Cpdag& estimated, const Dag& truth);

struct ShdScore {
    int shd = 0;
    double normalized = 0.0;
};

// One unit per vertex pair that differs: missing or extra adjacency, reversed
// direction, or directed vs undirected. Normalized by q(q-1)/2.
ShdScore normalized_shd(const Cpdag& estimated, const Cpdag& truth);

struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int shd = 0;
    double normalized_shd = 0.0;
    int q = 0;
};

// The truth DAG is compared through its CPDAG for SHD.
EvalReport evaluate(const Cpdag& estimated, const Dag& truth);

// HSIC_b = tr(K_a H K_b H) / n^2 with Gaussian kernels at the median pairwise
// distance of each block (floored at kHsicBandwidthFloor).
inline constexpr double kHsicBandwidthFloor = 1e-3;
double hsic_bandwidth(const SampleBlock& block);
double hsic_biased(const SampleBlock& a, const SampleBlock& b);

// Average HSIC between each column of the feature-space residual of
// target | parents and the candidate's block.
double residual_hsic_diagnostic(const Dataset& data, int target, std::span<const int> parents, int candidate,
                                const ScoreParams& params, const ScoreOptions& opts = {});

}  // namespace kcdisc
