#include "kcdisc/rng.hpp"
#include "kcdisc/search.hpp"

#include "bic_scorer.hpp"

#include <doctest.h>

using namespace kcdisc;

namespace {

Cpdag cpdag_of(int q, const std::vector<Edge>& edges) { return dag_to_cpdag(Dag::from_edges(q, edges)); }

// Linear-Gaussian samples from a DAG, all edge weights 0.8.
Eigen::MatrixXd linear_data(const Dag& dag, int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, dag.size());
    for (int v : dag.topological_order()) {
        for (int i = 0; i < n; ++i) {
            double s = rng.normal();
            for (int p : dag.parents(v)) s += 0.8 * x(i, p);
            x(i, v) = s;
        }
    }
    return x;
}

}  // namespace

TEST_CASE("insert enumeration") {
    const auto ops = valid_inserts(Cpdag(3));
    REQUIRE(ops.size() == 6);
    for (const auto& op : ops) CHECK(op.subset.empty());
    CHECK(ops.front().x == 0);
    CHECK(ops.front().y == 1);
    CHECK(ops.back().x == 2);
    CHECK(ops.back().y == 1);

    const auto complete = cpdag_of(3, {{0, 1}, {0, 2}, {1, 2}});
    CHECK(valid_inserts(complete).empty());

    // Node 2 has neighbour 0 not adjacent to 1, so Insert(1, 2, T) has T = {} and T = {0}.
    const auto one = cpdag_of(3, {{0, 2}});
    int into_two = 0;
    for (const auto& op : valid_inserts(one)) {
        if (op.x == 1 && op.y == 2) ++into_two;
    }
    CHECK(into_two == 2);
}

TEST_CASE("insert validity blocks semi-directed paths") {
    // 0 -> 2 <- 1 with 2 -> 3 compelled. 0 -> 2 -> 3 is an unblocked
    // semi-directed path, so adding 3 -> 0 would close a cycle.
    const auto g = cpdag_of(4, {{0, 2}, {1, 2}, {2, 3}});
    for (const auto& op : valid_inserts(g)) CHECK_FALSE((op.x == 3 && op.y == 0));
    // The reverse direction is fine.
    bool found = false;
    for (const auto& op : valid_inserts(g)) found = found || (op.x == 0 && op.y == 3);
    CHECK(found);
}

TEST_CASE("delete enumeration") {
    CHECK(valid_deletes(Cpdag(3)).empty());
    const auto ops = valid_deletes(cpdag_of(2, {{0, 1}}));
    REQUIRE(ops.size() == 1);
    CHECK(ops[0].kind == OperatorKind::remove);
    CHECK(ops[0].subset.empty());

    // Triangle with all edges undirected: deleting 0 - 1 may orient towards 2 or not.
    const auto tri = cpdag_of(3, {{0, 1}, {0, 2}, {1, 2}});
    int zero_one = 0;
    for (const auto& op : valid_deletes(tri)) {
        if (op.x == 0 && op.y == 1) ++zero_one;
    }
    CHECK(zero_one == 2);
}

TEST_CASE("applying operators") {
    EdgeOperator ins{OperatorKind::insert, 0, 1, {}, 0.0};
    const auto two = apply_operator(Cpdag(2), ins);
    CHECK(two.undirected_edges() == std::vector<Edge>{{0, 1}});

    // Second parent of 2 with T = {0} creates the v-structure 0 -> 2 <- 1.
    const auto one = cpdag_of(3, {{0, 2}});
    const auto v = apply_operator(one, EdgeOperator{OperatorKind::insert, 1, 2, {0}, 0.0});
    CHECK(v.directed_edges() == std::vector<Edge>{{0, 2}, {1, 2}});
    CHECK(v.undirected_edges().empty());
    // With T empty the class stays a chain.
    const auto c = apply_operator(one, EdgeOperator{OperatorKind::insert, 1, 2, {}, 0.0});
    CHECK(c.directed_edges().empty());

    // Insert then delete the same edge.
    const auto base = cpdag_of(4, {{0, 1}, {2, 3}});
    const auto added = apply_operator(base, EdgeOperator{OperatorKind::insert, 1, 2, {}, 0.0});
    CHECK(added.num_edges() == 3);
    const auto back = apply_operator(added, EdgeOperator{OperatorKind::remove, 1, 2, {}, 0.0});
    CHECK(back == base);

    // Deleting from a collider.
    const auto collider = cpdag_of(3, {{0, 2}, {1, 2}});
    const auto del = apply_operator(collider, EdgeOperator{OperatorKind::remove, 1, 2, {}, 0.0});
    CHECK(del.undirected_edges() == std::vector<Edge>{{0, 2}});

    CHECK_THROWS_AS(apply_operator(two, ins), GraphError);
    CHECK_THROWS_AS(apply_operator(Cpdag(2), EdgeOperator{OperatorKind::remove, 0, 1, {}, 0.0}), GraphError);
    CHECK_THROWS_AS(apply_operator(one, EdgeOperator{OperatorKind::insert, 1, 2, {1}, 0.0}), GraphError);
}

TEST_CASE("every valid operator yields a valid cpdag") {
    Rng rng(4);
    for (int trial = 0; trial < 60; ++trial) {
        const int q = rng.uniform_int(3, 6);
        std::vector<Edge> edges;
        for (int a = 0; a < q; ++a) {
            for (int b = a + 1; b < q; ++b) {
                if (rng.uniform() < 0.4) edges.emplace_back(a, b);
            }
        }
        const auto g = cpdag_of(q, edges);
        auto ops = valid_inserts(g);
        const auto dels = valid_deletes(g);
        ops.insert(ops.end(), dels.begin(), dels.end());
        for (const auto& op : ops) {
            const auto h = apply_operator(g, op);
            CHECK(pdag_to_cpdag(h) == h);
            CHECK(h.adjacent(op.x, op.y) == (op.kind == OperatorKind::insert));
            CHECK(h.num_edges() == g.num_edges() + (op.kind == OperatorKind::insert ? 1 : -1));
        }
    }
}

TEST_CASE("operator deltas equal the change in graph score") {
    const auto truth = Dag::from_edges(4, {{0, 2}, {1, 2}, {2, 3}});
    BicScorer scorer(linear_data(truth, 300, 1));
    const auto g = cpdag_of(4, {{0, 2}, {2, 3}});
    const double base = cpdag_score(scorer, g);
    auto ops = enumerate_inserts(g, scorer);
    const auto dels = enumerate_deletes(g, scorer);
    ops.insert(ops.end(), dels.begin(), dels.end());
    REQUIRE_FALSE(ops.empty());
    for (const auto& op : ops) {
        const double after = cpdag_score(scorer, apply_operator(g, op));
        CHECK(op.delta == doctest::Approx(after - base).epsilon(1e-9));
    }
}

TEST_CASE("ges with a score-equivalent score") {
    SUBCASE("collider") {
        const auto truth = Dag::from_edges(3, {{0, 2}, {1, 2}});
        BicScorer scorer(linear_data(truth, 500, 2));
        const auto res = ges(scorer);
        CHECK(res.graph == dag_to_cpdag(truth));
    }
    SUBCASE("independent variables") {
        BicScorer scorer(linear_data(Dag(4), 500, 3));
        const auto res = ges(scorer);
        CHECK(res.graph.num_edges() == 0);
    }
    SUBCASE("two dependent variables give an undirected edge") {
        const auto truth = Dag::from_edges(2, {{0, 1}});
        BicScorer scorer(linear_data(truth, 200, 4));
        const auto res = ges(scorer);
        CHECK(res.graph.undirected_edges() == std::vector<Edge>{{0, 1}});
    }
}

TEST_CASE("ges phases are monotone and replayable") {
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const int q = 5;
        std::vector<Edge> edges;
        for (int a = 0; a < q; ++a) {
            for (int b = a + 1; b < q; ++b) {
                if (rng.uniform() < 0.4) edges.emplace_back(a, b);
            }
        }
        BicScorer scorer(linear_data(Dag::from_edges(q, edges), 150, 100 + trial));
        const auto res = ges(scorer);
        Cpdag g(q);
        double score = cpdag_score(scorer, g);
        for (const auto* phase : {&res.forward, &res.backward}) {
            for (const auto& step : *phase) {
                CHECK(step.score_after > step.score_before);
                CHECK(step.score_before == doctest::Approx(score).epsilon(1e-12));
                g = apply_operator(g, step.op);
                CHECK(pdag_to_cpdag(g) == g);
                score = cpdag_score(scorer, g);
                CHECK(step.score_after - step.score_before == doctest::Approx(step.op.delta).epsilon(1e-6));
            }
        }
        for (const auto& step : res.forward) CHECK(step.op.kind == OperatorKind::insert);
        for (const auto& step : res.backward) CHECK(step.op.kind == OperatorKind::remove);
        CHECK(g == res.graph);
        CHECK(score == doctest::Approx(res.score).epsilon(1e-12));
    }
}

TEST_CASE("search results do not depend on the worker count") {
    const auto truth = Dag::from_edges(5, {{0, 1}, {1, 2}, {3, 2}, {2, 4}});
    const auto x = linear_data(truth, 200, 9);
    BicScorer serial(x);
    BicScorer threaded(x);
    SearchOptions opts;
    opts.workers = 3;
    const auto a = ges(serial);
    const auto b = ges(threaded, opts);
    CHECK(a.graph == b.graph);
    CHECK(a.score == b.score);
    CHECK(a.forward.size() == b.forward.size());
}

TEST_CASE("ties go to the lexicographically smallest operator") {
    // Every family scores the same, so each insert has delta 0 except ones we favour.
    struct FlatScorer final : LocalScorer {
        int num_variables() const override { return 3; }
        double local_score(int target, const std::vector<int>& parents) override {
            // Any single parent is worth +1; extra parents are worth nothing.
            (void)target;
            return parents.empty() ? 0.0 : 1.0;
        }
    } scorer;
    const auto res = ges(scorer);
    REQUIRE_FALSE(res.forward.empty());
    CHECK(res.forward.front().op.x == 0);
    CHECK(res.forward.front().op.y == 1);
}
