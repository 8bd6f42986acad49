#include "kcdisc/graph.hpp"
#include "kcdisc/rng.hpp"

#include <doctest.h>

using namespace kcdisc;

namespace {

Dag random_dag_for_test(Rng& rng, int q, double p) {
    std::vector<Edge> edges;
    for (int a = 0; a < q; ++a) {
        for (int b = a + 1; b < q; ++b) {
            if (rng.uniform() < p) edges.emplace_back(a, b);
        }
    }
    // Relabel so edges do not always point from low to high ids.
    std::vector<int> perm(static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i) perm[static_cast<std::size_t>(i)] = i;
    rng.shuffle(std::span<int>(perm));
    for (auto& [a, b] : edges) {
        a = perm[static_cast<std::size_t>(a)];
        b = perm[static_cast<std::size_t>(b)];
    }
    return Dag::from_edges(q, edges);
}

}  // namespace

TEST_CASE("pdag edge bookkeeping") {
    Pdag g(3);
    g.add_directed(0, 1);
    g.add_undirected(1, 2);
    CHECK(g.has_directed(0, 1));
    CHECK_FALSE(g.has_directed(1, 0));
    CHECK(g.has_undirected(2, 1));
    CHECK(g.adjacent(1, 0));
    CHECK(g.parents(1) == std::vector<int>{0});
    CHECK(g.neighbors(1) == std::vector<int>{2});
    CHECK(g.num_edges() == 2);
    CHECK_THROWS_AS(g.add_directed(1, 0), GraphError);
    CHECK_THROWS_AS(g.add_directed(1, 1), GraphError);
    g.orient(2, 1);
    CHECK(g.has_directed(2, 1));
    CHECK_THROWS_AS(g.orient(2, 1), GraphError);
    g.remove_edge(1, 0);
    CHECK_FALSE(g.adjacent(0, 1));
}

TEST_CASE("dag construction rejects cycles") {
    CHECK_THROWS_AS(Dag::from_edges(3, {{0, 1}, {1, 2}, {2, 0}}), GraphError);
    Pdag g(2);
    g.add_undirected(0, 1);
    CHECK_THROWS_AS(Dag::from_pdag(g), GraphError);
    const auto d = Dag::from_edges(4, {{3, 1}, {1, 0}, {2, 0}});
    CHECK(d.topological_order() == std::vector<int>{2, 3, 1, 0});
}

TEST_CASE("completion of chains, forks and colliders") {
    const auto chain = dag_to_cpdag(Dag::from_edges(3, {{0, 1}, {1, 2}}));
    CHECK(chain.directed_edges().empty());
    CHECK(chain.undirected_edges() == std::vector<Edge>{{0, 1}, {1, 2}});

    const auto fork = dag_to_cpdag(Dag::from_edges(3, {{1, 0}, {1, 2}}));
    CHECK(fork.directed_edges().empty());

    const auto collider = dag_to_cpdag(Dag::from_edges(3, {{0, 2}, {1, 2}}));
    CHECK(collider.directed_edges() == std::vector<Edge>{{0, 2}, {1, 2}});
    CHECK(collider.undirected_edges().empty());
}

TEST_CASE("meek rules") {
    // R1: a v-structure 0 -> 2 <- 1 followed by 2 - 3 compels 2 -> 3.
    const auto r1 = dag_to_cpdag(Dag::from_edges(4, {{0, 2}, {1, 2}, {2, 3}}));
    CHECK(r1.directed_edges() == std::vector<Edge>{{0, 2}, {1, 2}, {2, 3}});

    // R2: 0 -> 1 -> 2 with 0 - 2 is oriented 0 -> 2. Built with 1 a collider child
    // of 0 and 3 so 0 -> 1 and 3 -> 1 are compelled, then 1 -> 2 by R1.
    const auto r2 = dag_to_cpdag(Dag::from_edges(4, {{0, 1}, {3, 1}, {1, 2}, {0, 2}}));
    CHECK(r2.pdag().has_directed(0, 2));
    CHECK(r2.pdag().has_directed(1, 2));

    // R3: 3 - 0, 3 - 2, 3 - 1 with 0 -> 1 <- 2 compels 3 -> 1.
    const auto r3 = dag_to_cpdag(Dag::from_edges(4, {{3, 0}, {3, 2}, {3, 1}, {0, 1}, {2, 1}}));
    CHECK(r3.directed_edges() == std::vector<Edge>{{0, 1}, {2, 1}, {3, 1}});
    CHECK(r3.undirected_edges() == std::vector<Edge>{{0, 3}, {2, 3}});
}

TEST_CASE("consistent extension") {
    const auto collider = Dag::from_edges(3, {{0, 2}, {1, 2}});
    CHECK(consistent_extension(dag_to_cpdag(collider)) == collider);

    // Undirected tree: extension adds no v-structure and is stable across calls.
    Pdag tree(4);
    tree.add_undirected(0, 1);
    tree.add_undirected(1, 2);
    tree.add_undirected(1, 3);
    const auto ext = consistent_extension(tree);
    CHECK(ext == consistent_extension(tree));
    for (int v = 0; v < 4; ++v) CHECK(ext.parents(v).size() <= 1);

    // A directed cycle has no extension.
    Pdag bad(3);
    bad.add_directed(0, 1);
    bad.add_directed(1, 2);
    bad.add_directed(2, 0);
    CHECK_THROWS_AS(consistent_extension(bad), GraphError);

    // 0 - 1 - 2 - 3 - 0 cycle of undirected edges is not chordal.
    Pdag square(4);
    square.add_undirected(0, 1);
    square.add_undirected(1, 2);
    square.add_undirected(2, 3);
    square.add_undirected(3, 0);
    CHECK_THROWS_AS(consistent_extension(square), GraphError);
}

TEST_CASE("random cpdags round trip through extension") {
    Rng rng(42);
    for (int trial = 0; trial < 300; ++trial) {
        const int q = rng.uniform_int(2, 7);
        const auto dag = random_dag_for_test(rng, q, rng.uniform(0.1, 0.9));
        const auto cp = dag_to_cpdag(dag);
        const auto ext = consistent_extension(cp);
        // Same skeleton and v-structures means same class.
        CHECK(dag_to_cpdag(ext) == cp);
        CHECK(pdag_to_cpdag(cp) == cp);
        CHECK(pdag_to_cpdag(ext.pdag()) == cp);
    }
}
