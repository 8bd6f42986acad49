#pragma once

#include <compare>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kcdisc {

using Edge = std::pair<int, int>;

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Partially directed graph over nodes 0..q-1. Each vertex pair carries no
// edge, a directed edge a -> b, or an undirected edge a - b.
class Pdag {
public:
    Pdag() = default;
    explicit Pdag(int q);

    int size() const { return q_; }

    bool adjacent(int a, int b) const { return mark(a, b) || mark(b, a); }
    bool has_directed(int a, int b) const { return mark(a, b) && !mark(b, a); }
    bool has_undirected(int a, int b) const { return mark(a, b) && mark(b, a); }

    void add_directed(int a, int b);
    void add_undirected(int a, int b);
    void remove_edge(int a, int b);
    // Turns a - b into a -> b.
    void orient(int a, int b);

    // Nodes with a directed edge into v, ascending.
    std::vector<int> parents(int v) const;
    std::vector<int> children(int v) const;
    // Nodes joined to v by an undirected edge, ascending.
    std::vector<int> neighbors(int v) const;
    std::vector<int> adjacents(int v) const;

    bool is_clique(const std::vector<int>& nodes) const;

    // Sorted (a, b) with a -> b; undirected edges listed once with a < b.
    std::vector<Edge> directed_edges() const;
    std::vector<Edge> undirected_edges() const;
    int num_edges() const;

    bool operator==(const Pdag&) const = default;

private:
    bool mark(int a, int b) const { return marks_[static_cast<std::size_t>(a * q_ + b)] != 0; }
    void set_mark(int a, int b, bool on) { marks_[static_cast<std::size_t>(a * q_ + b)] = on ? 1 : 0; }
    void check(int a, int b) const;

    int q_ = 0;
    // marks_(a, b) = 1 when an edge leaves a towards b; both set means undirected.
    std::vector<unsigned char> marks_;
};

// Directed acyclic graph; construction rejects cycles.
class Dag {
public:
    Dag() = default;
    explicit Dag(int q) : g_(q) {}
    static Dag from_edges(int q, const std::vector<Edge>& edges);
    // Throws GraphError if `g` has undirected edges or a directed cycle.
    static Dag from_pdag(const Pdag& g);

    int size() const { return g_.size(); }
    std::vector<int> parents(int v) const { return g_.parents(v); }
    std::vector<Edge> edges() const { return g_.directed_edges(); }
    bool has_edge(int a, int b) const { return g_.has_directed(a, b); }
    const Pdag& pdag() const { return g_; }
    std::vector<int> topological_order() const;

    bool operator==(const Dag&) const = default;

private:
    Pdag g_;
};

// Completed PDAG: the canonical representative of a Markov equivalence class.
// Only produced by completion, so every instance has a consistent extension.
class Cpdag {
public:
    Cpdag() = default;
    // Edgeless graph on q nodes.
    explicit Cpdag(int q) : g_(q) {}

    int size() const { return g_.size(); }
    const Pdag& pdag() const { return g_; }
    std::vector<Edge> directed_edges() const { return g_.directed_edges(); }
    std::vector<Edge> undirected_edges() const { return g_.undirected_edges(); }
    bool adjacent(int a, int b) const { return g_.adjacent(a, b); }
    int num_edges() const { return g_.num_edges(); }

    bool operator==(const Cpdag&) const = default;

private:
    friend Cpdag dag_to_cpdag(const Dag& dag);
    explicit Cpdag(Pdag g) : g_(std::move(g)) {}
    Pdag g_;
};

bool is_acyclic(const Pdag& g);

// Dor-Tarsi extension: repeatedly removes the lowest-id sink whose undirected
// neighbours are adjacent to all of its other adjacents. Throws GraphError if
// no consistent extension exists.
Dag consistent_extension(const Pdag& g);
inline Dag consistent_extension(const Cpdag& g) { return consistent_extension(g.pdag()); }

// Keeps v-structure edges directed and closes under Meek rules R1-R3.
Cpdag dag_to_cpdag(const Dag& dag);

Cpdag pdag_to_cpdag(const Pdag& g);
inline Cpdag pdag_to_cpdag(const Cpdag& g) { return pdag_to_cpdag(g.pdag()); }

}  // namespace kcdisc
