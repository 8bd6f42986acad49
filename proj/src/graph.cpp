#include "kcdisc/graph.hpp"

#include <algorithm>
#include <string>

namespace kcdisc {

Pdag::Pdag(int q) : q_(q), marks_(static_cast<std::size_t>(q) * static_cast<std::size_t>(q), 0) {
    if (q < 0) throw std::invalid_argument("negative node count");
}

void Pdag::check(int a, int b) const {
    if (a < 0 || b < 0 || a >= q_ || b >= q_) throw GraphError("node index out of range");
    if (a == b) throw GraphError("self-loops are not allowed");
}

void Pdag::add_directed(int a, int b) {
    check(a, b);
    if (adjacent(a, b)) {
        throw GraphError("edge already present between " + std::to_string(a) + " and " + std::to_string(b));
    }
    set_mark(a, b, true);
}

void Pdag::add_undirected(int a, int b) {
    check(a, b);
    if (adjacent(a, b)) {
        throw GraphError("edge already present between " + std::to_string(a) + " and " + std::to_string(b));
    }
    set_mark(a, b, true);
    set_mark(b, a, true);
}

void Pdag::remove_edge(int a, int b) {
    check(a, b);
    set_mark(a, b, false);
    set_mark(b, a, false);
}

void Pdag::orient(int a, int b) {
    check(a, b);
    if (!has_undirected(a, b)) throw GraphError("orient: edge is not undirected");
    set_mark(b, a, false);
}

std::vector<int> Pdag::parents(int v) const {
    std::vector<int> out;
    for (int u = 0; u < q_; ++u) {
        if (u != v && has_directed(u, v)) out.push_back(u);
    }
    return out;
}

std::vector<int> Pdag::children(int v) const {
    std::vector<int> out;
    for (int u = 0; u < q_; ++u) {
        if (u != v && has_directed(v, u)) out.push_back(u);
    }
    return out;
}

std::vector<int> Pdag::neighbors(int v) const {
    std::vector<int> out;
    for (int u = 0; u < q_; ++u) {
        if (u != v && has_undirected(u, v)) out.push_back(u);
    }
    return out;
}

std::vector<int> Pdag::adjacents(int v) const {
    std::vector<int> out;
    for (int u = 0; u < q_; ++u) {
        if (u != v && adjacent(u, v)) out.push_back(u);
    }
    return out;
}

bool Pdag::is_clique(const std::vector<int>& nodes) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            if (!adjacent(nodes[i], nodes[j])) return false;
        }
    }
    return true;
}

std::vector<Edge> Pdag::directed_edges() const {
    std::vector<Edge> out;
    for (int a = 0; a < q_; ++a) {
        for (int b = 0; b < q_; ++b) {
            if (a != b && has_directed(a, b)) out.emplace_back(a, b);
        }
    }
    return out;
}

std::vector<Edge> Pdag::undirected_edges() const {
    std::vector<Edge> out;
    for (int a = 0; a < q_; ++a) {
        for (int b = a + 1; b < q_; ++b) {
            if (has_undirected(a, b)) out.emplace_back(a, b);
        }
    }
    return out;
}

int Pdag::num_edges() const {
    int count = 0;
    for (int a = 0; a < q_; ++a) {
        for (int b = a + 1; b < q_; ++b) count += adjacent(a, b) ? 1 : 0;
    }
    return count;
}

bool is_acyclic(const Pdag& g) {
    // Kahn over directed edges only.
    const int q = g.size();
    std::vector<int> indeg(static_cast<std::size_t>(q), 0);
    for (const auto& [a, b] : g.directed_edges()) ++indeg[static_cast<std::size_t>(b)];
    std::vector<int> stack;
    for (int v = 0; v < q; ++v) {
        if (indeg[static_cast<std::size_t>(v)] == 0) stack.push_back(v);
    }
    int seen = 0;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        ++seen;
        for (int c : g.children(v)) {
            if (--indeg[static_cast<std::size_t>(c)] == 0) stack.push_back(c);
        }
    }
    return seen == q;
}

Dag Dag::from_edges(int q, const std::vector<Edge>& edges) {
    Pdag g(q);
    for (const auto& [a, b] : edges) g.add_directed(a, b);
    return from_pdag(g);
}

Dag Dag::from_pdag(const Pdag& g) {
    if (!g.undirected_edges().empty()) throw GraphError("a DAG cannot contain undirected edges");
    if (!is_acyclic(g)) throw GraphError("graph contains a directed cycle");
    Dag d;
    d.g_ = g;
    return d;
}

std::vector<int> Dag::topological_order() const {
    const int q = size();
    std::vector<int> indeg(static_cast<std::size_t>(q), 0);
    for (const auto& [a, b] : edges()) ++indeg[static_cast<std::size_t>(b)];
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(q));
    std::vector<bool> done(static_cast<std::size_t>(q), false);
    // Lowest-id ready node first, so the order is deterministic.
    while (static_cast<int>(order.size()) < q) {
        int pick = -1;
        for (int v = 0; v < q; ++v) {
            if (!done[static_cast<std::size_t>(v)] && indeg[static_cast<std::size_t>(v)] == 0) {
                pick = v;
                break;
            }
        }
        done[static_cast<std::size_t>(pick)] = true;
        order.push_back(pick);
        for (int c : g_.children(pick)) --indeg[static_cast<std::size_t>(c)];
    }
    return order;
}

Dag consistent_extension(const Pdag& g) {
    const int q = g.size();
    Pdag work = g;
    Pdag out = g;
    std::vector<bool> removed(static_cast<std::size_t>(q), false);
    for (int round = 0; round < q; ++round) {
        int pick = -1;
        for (int x = 0; x < q && pick < 0; ++x) {
            if (removed[static_cast<std::size_t>(x)]) continue;
            if (!work.children(x).empty()) continue;
            const auto adj = work.adjacents(x);
            bool ok = true;
            for (int y : work.neighbors(x)) {
                for (int z : adj) {
                    if (z != y && !work.adjacent(y, z)) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) break;
            }
            if (ok) pick = x;
        }
        if (pick < 0) throw GraphError("graph admits no consistent DAG extension");
        for (int y : work.neighbors(pick)) out.orient(y, pick);
        for (int y : work.adjacents(pick)) work.remove_edge(y, pick);
        removed[static_cast<std::size_t>(pick)] = true;
    }
    return Dag::from_pdag(out);
}

namespace {

// Meek rules R1-R3 applied until nothing changes.
void apply_meek_rules(Pdag& g) {
    const int q = g.size();
    bool changed = true;
    while (changed) {
        changed = false;
        for (int a = 0; a < q; ++a) {
            for (int b = 0; b < q; ++b) {
                if (a == b || !g.has_undirected(a, b)) continue;
                bool orient = false;
                // R1: c -> a - b, c and b non-adjacent  =>  a -> b
                for (int c : g.parents(a)) {
                    if (c != b && !g.adjacent(c, b)) {
                        orient = true;
                        break;
                    }
                }
                // R2: a -> c -> b with a - b  =>  a -> b
                if (!orient) {
                    for (int c : g.children(a)) {
                        if (g.has_directed(c, b)) {
                            orient = true;
                            break;
                        }
                    }
                }
                // R3: a - c -> b, a - d -> b, c and d non-adjacent  =>  a -> b
                if (!orient) {
                    const auto nb = g.neighbors(a);
                    for (std::size_t i = 0; i < nb.size() && !orient; ++i) {
                        if (!g.has_directed(nb[i], b)) continue;
                        for (std::size_t j = i + 1; j < nb.size(); ++j) {
                            if (g.has_directed(nb[j], b) && !g.adjacent(nb[i], nb[j])) {
                                orient = true;
                                break;
                            }
                        }
                    }
                }
                if (orient) {
                    g.orient(a, b);
                    changed = true;
                }
            }
        }
    }
}

}  // namespace

Cpdag dag_to_cpdag(const Dag& dag) {
    const int q = dag.size();
    Pdag g(q);
    for (const auto& [a, b] : dag.edges()) g.add_undirected(a, b);
    // Compelled by v-structures: a -> c <- b with a, b non-adjacent.
    for (int c = 0; c < q; ++c) {
        const auto pa = dag.parents(c);
        for (std::size_t i = 0; i < pa.size(); ++i) {
            for (std::size_t j = i + 1; j < pa.size(); ++j) {
                if (dag.pdag().adjacent(pa[i], pa[j])) continue;
                if (g.has_undirected(pa[i], c)) g.orient(pa[i], c);
                if (g.has_undirected(pa[j], c)) g.orient(pa[j], c);
            }
        }
    }
    apply_meek_rules(g);
    return Cpdag(std::move(g));
}

Cpdag pdag_to_cpdag(const Pdag& g) { return dag_to_cpdag(consistent_extension(g)); }

}  // namespace kcdisc
