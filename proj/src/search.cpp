#include "kcdisc/search.hpp"

#include "kcdisc/parallel.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace kcdisc {

namespace {

// Deltas at or below this are treated as no improvement; it sits well above
// the rounding noise of summed family scores.
constexpr double kMinDelta = 1e-8;

std::vector<int> set_union(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<int> set_difference(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool is_subset(const std::vector<int>& a, const std::vector<int>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Neighbours of y (undirected) that are adjacent to x.
std::vector<int> na_yx(const Pdag& g, int y, int x) {
    std::vector<int> out;
    for (int t : g.neighbors(y)) {
        if (g.adjacent(t, x)) out.push_back(t);
    }
    return out;
}

// True when every semi-directed path from `from` to `to` passes through `blockers`.
bool semi_directed_paths_blocked(const Pdag& g, int from, int to, const std::vector<int>& blockers) {
    const int q = g.size();
    std::vector<bool> seen(static_cast<std::size_t>(q), false);
    for (int b : blockers) seen[static_cast<std::size_t>(b)] = true;
    std::deque<int> queue{from};
    seen[static_cast<std::size_t>(from)] = true;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        for (int w = 0; w < q; ++w) {
            if (w == u || seen[static_cast<std::size_t>(w)]) continue;
            if (!(g.has_directed(u, w) || g.has_undirected(u, w))) continue;
            if (w == to) return false;
            seen[static_cast<std::size_t>(w)] = true;
            queue.push_back(w);
        }
    }
    return true;
}

template <typename Fn>
void for_each_subset(const std::vector<int>& pool, Fn&& fn) {
    const std::size_t m = pool.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
        std::vector<int> subset;
        for (std::size_t k = 0; k < m; ++k) {
            if (mask & (std::size_t{1} << k)) subset.push_back(pool[k]);
        }
        fn(subset);
    }
}

bool insert_valid(const Pdag& g, int x, int y, const std::vector<int>& t) {
    if (x == y || g.adjacent(x, y)) return false;
    for (int v : t) {
        if (!g.has_undirected(v, y) || g.adjacent(v, x)) return false;
    }
    const auto cond = set_union(na_yx(g, y, x), t);
    return g.is_clique(cond) && semi_directed_paths_blocked(g, y, x, cond);
}

bool delete_valid(const Pdag& g, int x, int y, const std::vector<int>& h) {
    if (!(g.has_directed(x, y) || g.has_undirected(x, y))) return false;
    const auto na = na_yx(g, y, x);
    return is_subset(h, na) && g.is_clique(set_difference(na, h));
}

bool op_less(const EdgeOperator& a, const EdgeOperator& b) {
    return std::tie(a.x, a.y, a.subset) < std::tie(b.x, b.y, b.subset);
}

using Family = std::pair<int, std::vector<int>>;

std::vector<EdgeOperator> with_deltas(const Cpdag& g, std::vector<EdgeOperator> ops, LocalScorer& scorer,
                                      const SearchOptions& opts) {
    const Dag before = consistent_extension(g);
    std::vector<Dag> after;
    after.reserve(ops.size());
    std::set<Family> needed;
    for (const auto& op : ops) {
        after.push_back(consistent_extension(apply_operator(g, op)));
        for (int v = 0; v < g.size(); ++v) {
            auto pb = before.parents(v);
            auto pa = after.back().parents(v);
            if (pb == pa) continue;
            needed.emplace(v, std::move(pb));
            needed.emplace(v, std::move(pa));
        }
    }
    std::vector<Family> todo;
    for (const auto& f : needed) {
        if (!scorer.is_cached(f.first, f.second)) todo.push_back(f);
    }
    parallel_for(todo.size(), opts.workers,
                 [&](std::size_t i) { scorer.local_score(todo[i].first, todo[i].second); });

    for (std::size_t k = 0; k < ops.size(); ++k) {
        double delta = 0.0;
        for (int v = 0; v < g.size(); ++v) {
            const auto pb = before.parents(v);
            const auto pa = after[k].parents(v);
            if (pb == pa) continue;
            delta += scorer.local_score(v, pa) - scorer.local_score(v, pb);
        }
        ops[k].delta = delta;
    }
    return ops;
}

}  // namespace

std::string describe(const EdgeOperator& op) {
    std::ostringstream os;
    os << (op.kind == OperatorKind::insert ? "Insert(" : "Delete(") << op.x << ", " << op.y << ", {";
    for (std::size_t k = 0; k < op.subset.size(); ++k) os << (k ? "," : "") << op.subset[k];
    os << "})";
    return os.str();
}

std::vector<EdgeOperator> valid_inserts(const Cpdag& cg) {
    const Pdag& g = cg.pdag();
    std::vector<EdgeOperator> ops;
    for (int x = 0; x < g.size(); ++x) {
        for (int y = 0; y < g.size(); ++y) {
            if (x == y || g.adjacent(x, y)) continue;
            const auto na = na_yx(g, y, x);
            std::vector<int> t0;
            for (int t : g.neighbors(y)) {
                if (!g.adjacent(t, x)) t0.push_back(t);
            }
            for_each_subset(t0, [&](const std::vector<int>& t) {
                const auto cond = set_union(na, t);
                if (g.is_clique(cond) && semi_directed_paths_blocked(g, y, x, cond)) {
                    ops.push_back({OperatorKind::insert, x, y, t, 0.0});
                }
            });
        }
    }
    std::sort(ops.begin(), ops.end(), op_less);
    return ops;
}

std::vector<EdgeOperator> valid_deletes(const Cpdag& cg) {
    const Pdag& g = cg.pdag();
    std::vector<EdgeOperator> ops;
    for (int x = 0; x < g.size(); ++x) {
        for (int y = 0; y < g.size(); ++y) {
            if (x == y || !(g.has_directed(x, y) || g.has_undirected(x, y))) continue;
            const auto na = na_yx(g, y, x);
            // For an undirected edge both orders with H empty give the same graph; keep one.
            const bool skip_empty = x > y && g.has_undirected(x, y) && delete_valid(g, y, x, {});
            for_each_subset(na, [&](const std::vector<int>& h) {
                if (h.empty() && skip_empty) return;
                if (g.is_clique(set_difference(na, h))) ops.push_back({OperatorKind::remove, x, y, h, 0.0});
            });
        }
    }
    std::sort(ops.begin(), ops.end(), op_less);
    return ops;
}

Cpdag apply_operator(const Cpdag& cg, const EdgeOperator& op) {
    Pdag g = cg.pdag();
    std::vector<int> subset = op.subset;
    std::sort(subset.begin(), subset.end());
    if (op.kind == OperatorKind::insert) {
        if (!insert_valid(g, op.x, op.y, subset)) throw GraphError("invalid operator " + describe(op));
        g.add_directed(op.x, op.y);
        for (int t : subset) g.orient(t, op.y);
    } else {
        if (!delete_valid(g, op.x, op.y, subset)) throw GraphError("invalid operator " + describe(op));
        g.remove_edge(op.x, op.y);
        for (int h : subset) {
            g.orient(op.y, h);
            if (g.has_undirected(op.x, h)) g.orient(op.x, h);
        }
    }
    return pdag_to_cpdag(g);
}

double cpdag_score(LocalScorer& scorer, const Cpdag& g) { return graph_score(scorer, consistent_extension(g)); }

std::vector<EdgeOperator> enumerate_inserts(const Cpdag& g, LocalScorer& scorer, const SearchOptions& opts) {
    return with_deltas(g, valid_inserts(g), scorer, opts);
}

std::vector<EdgeOperator> enumerate_deletes(const Cpdag& g, LocalScorer& scorer, const SearchOptions& opts) {
    return with_deltas(g, valid_deletes(g), scorer, opts);
}

namespace {

// Applies best operators until none improves; returns the steps taken.
template <typename Enumerate>
std::vector<SearchStep> run_phase(Cpdag& g, double& score, LocalScorer& scorer, Enumerate&& enumerate) {
    std::vector<SearchStep> steps;
    while (true) {
        const auto ops = enumerate(g);
        const EdgeOperator* best = nullptr;
        for (const auto& op : ops) {
            if (op.delta > kMinDelta && (!best || op.delta > best->delta)) best = &op;
        }
        if (!best) break;
        SearchStep step{*best, score, 0.0};
        g = apply_operator(g, *best);
        score = cpdag_score(scorer, g);
        step.score_after = score;
        steps.push_back(std::move(step));
    }
    return steps;
}

}  // namespace

GesResult ges(LocalScorer& scorer, const SearchOptions& opts) {
    const int q = scorer.num_variables();
    if (q < 2) throw std::invalid_argument("search needs at least two variables");
    GesResult res;
    res.graph = Cpdag(q);
    res.score = cpdag_score(scorer, res.graph);
    res.forward = run_phase(res.graph, res.score, scorer,
                            [&](const Cpdag& g) { return enumerate_inserts(g, scorer, opts); });
    res.backward = run_phase(res.graph, res.score, scorer,
                             [&](const Cpdag& g) { return enumerate_deletes(g, scorer, opts); });
    return res;
}

GesResult ges(const Dataset& data, ScoreKind kind, const SearchOptions& opts) {
    KernelScorer scorer(data, kind);
    return ges(scorer, opts);
}

}  // namespace kcdisc
