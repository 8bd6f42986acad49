#pragma once

#include "kcdisc/graph.hpp"
#include "kcdisc/score.hpp"

#include <functional>
#include <string>
#include <vector>

namespace kcdisc {

enum class OperatorKind { insert, remove };

// Insert(x, y, T): add x -> y and orient t -> y for t in T.
// Delete(x, y, H): drop the x-y edge and orient y -> h (and x -> h) for h in H.
struct EdgeOperator {
    OperatorKind kind = OperatorKind::insert;
    int x = -1;
    int y = -1;
    std::vector<int> subset;
    double delta = 0.0;
};

std::string describe(const EdgeOperator& op);

// Valid operators without score deltas, in lexicographic (x, y, subset) order.
std::vector<EdgeOperator> valid_inserts(const Cpdag& g);
std::vector<EdgeOperator> valid_deletes(const Cpdag& g);

Cpdag apply_operator(const Cpdag& g, const EdgeOperator& op);

// Sum of family scores over the deterministic consistent extension of g.
double cpdag_score(LocalScorer& scorer, const Cpdag& g);

struct SearchOptions {
    // Upper bound on concurrent family optimizations.
    int workers = 1;
};

// Operators with deltas = score(extension(apply(g, op))) - score(extension(g)).
// Uncached families are optimized up front, `workers` at a time.
std::vector<EdgeOperator> enumerate_inserts(const Cpdag& g, LocalScorer& scorer, const SearchOptions& opts = {});
std::vector<EdgeOperator> enumerate_deletes(const Cpdag& g, LocalScorer& scorer, const SearchOptions& opts = {});

struct SearchStep {
    EdgeOperator op;
    double score_before = 0.0;
    double score_after = 0.0;
};

struct GesResult {
    Cpdag graph;
    double score = 0.0;
    std::vector<SearchStep> forward;
    std::vector<SearchStep> backward;
};

// Greedy equivalence search: forward inserts to a local maximum, then
// backward deletes. Each step applies the operator with the largest positive
// delta; ties go to the lexicographically smallest (x, y, subset).
GesResult ges(LocalScorer& scorer, const SearchOptions& opts = {});
GesResult ges(const Dataset& data, ScoreKind kind, const SearchOptions& opts = {});

}  // namespace kcdisc
