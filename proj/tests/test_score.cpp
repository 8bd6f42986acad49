#include "kcdisc/graph.hpp"
#include "kcdisc/score.hpp"

#include "score_oracle.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace kcdisc;

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

ScoreParams random_params(Rng& rng) {
    return {rng.uniform(0.3, 3.0), rng.uniform(0.3, 3.0), rng.uniform(0.05, 1.5)};
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST_CASE("jacobian term closed forms") {
    Eigen::MatrixXd x1(2, 1);
    x1 << 0, 1;
    CHECK(jacobian_term(x1, 1.0).value == doctest::Approx(-1.0).epsilon(1e-14));

    Eigen::MatrixXd x2(2, 2);
    x2 << 0, 0, 1, 2;
    CHECK(jacobian_term(x2, 1.0).value == doctest::Approx(-5.0 + std::log(5.0)).epsilon(1e-14));

    Eigen::MatrixXd dup(2, 1);
    dup << 3, 3;
    const auto j = jacobian_term(dup, 1.0);
    CHECK(std::isfinite(j.value));
    CHECK(j.degenerate_pairs == 2);
    CHECK(j.value == doctest::Approx(2.0 * std::log(kDuplicatePairFloor)));
}

TEST_CASE("two-sample score assembled by hand") {
    Eigen::MatrixXd x(2, 2);
    x << 0, 0, 1, 1;  // target and parent both (0, 1)
    const auto data = testutil::columns_dataset(x);
    const ScoreParams p{1.0, 1.0, 1.0};
    const double e = std::exp(-0.5);
    // K_X = K_PA = [[1, e], [e, 1]]; K_theta = [[2, e], [e, 2]].
    const double det = 4.0 - e * e;
    Eigen::Matrix2d inv;
    inv << 2.0 / det, -e / det, -e / det, 2.0 / det;
    Eigen::Matrix2d kx;
    kx << 1, e, e, 1;
    const double trace = (kx * inv * kx).trace();
    const double expected = -0.5 * trace - 1.0 * std::log(det) - 2.0 * kLog2Pi + (-1.0);
    const std::vector<int> pa{1};
    CHECK(joint_marginal_score(data, 0, pa, p) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("root family closed forms for both root kernels") {
    Eigen::MatrixXd x(2, 1);
    x << 0, 1;
    const auto data = testutil::columns_dataset(x);
    const ScoreParams p{1.0, 1.0, 0.5};
    const double e = std::exp(-0.5);
    const double s2 = p.sigma_eps * p.sigma_eps;

    ScoreOptions zero;
    zero.root = RootKernel::zero;
    // K_theta = s2 I: -tr(K_X^2) / (2 s2) - (n/2) * n * log s2 - (n^2/2) log 2pi + J
    const double tr_kx2 = 2.0 + 2.0 * e * e;
    const double want_zero = -tr_kx2 / (2.0 * s2) - 2.0 * std::log(s2) - 2.0 * kLog2Pi - 1.0;
    CHECK(joint_marginal_score(data, 0, {}, p, zero) == doctest::Approx(want_zero).epsilon(1e-13));

    // K_theta = 11' + s2 I has eigenvalues 2 + s2 (along 1) and s2.
    const double l1 = 2.0 + s2;
    Eigen::Matrix2d kx;
    kx << 1, e, e, 1;
    Eigen::Matrix2d kth = Eigen::Matrix2d::Constant(1.0);
    kth.diagonal().array() += s2;
    const double want_const = -0.5 * (kx * kth.inverse() * kx).trace() - std::log(l1 * s2) - 2.0 * kLog2Pi - 1.0;
    CHECK(joint_marginal_score(data, 0, {}, p) == doctest::Approx(want_const).epsilon(1e-13));
}

TEST_CASE("scores agree with the brute-force oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = rng.uniform_int(2, 6);
        const int q = rng.uniform_int(1, 3);
        std::vector<int> dims;
        for (int v = 0; v < q; ++v) dims.push_back(rng.uniform_int(1, 2));
        const auto data = testutil::random_dataset(rng, n, dims);
        std::vector<int> parents;
        for (int v = 1; v < q; ++v) {
            if (rng.coin()) parents.push_back(v);
        }
        const auto p = random_params(rng);
        const auto root = rng.coin() ? RootKernel::zero : RootKernel::constant;
        ScoreOptions opts;
        opts.root = root;
        for (auto kind : {ScoreKind::ours, ScoreKind::marg, ScoreKind::gp}) {
            const double got = local_score_value(data, 0, parents, kind, p, opts);
            const double want = oracle::score(kind, data.block(0), data.block(parents), p, root);
            CHECK(std::abs(got - want) <= 1e-8 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("analytic gradients match central differences") {
    Rng rng(5);
    for (auto kind : {ScoreKind::ours, ScoreKind::marg, ScoreKind::gp}) {
        for (int trial = 0; trial < 4; ++trial) {
            const auto data = testutil::random_dataset(rng, 20, {1, 1, 2});
            std::vector<int> parents;
            if (trial % 2 == 0) parents = {1, 2};
            const auto p = random_params(rng);
            const auto g = score_gradient(data, 0, parents, p, kind);
            const double h = 1e-5;
            // sigma_x is not a free parameter of the baselines.
            for (int k = kind == ScoreKind::ours ? 0 : 1; k < 3; ++k) {
                ScoreParams up = p, dn = p;
                double* fu[3] = {&up.sigma_x, &up.sigma_p, &up.sigma_eps};
                double* fd[3] = {&dn.sigma_x, &dn.sigma_p, &dn.sigma_eps};
                *fu[k] += h;
                *fd[k] -= h;
                const double num = (local_score_value(data, 0, parents, kind, up) -
                                    local_score_value(data, 0, parents, kind, dn)) /
                                   (2 * h);
                INFO("kind " << to_string(kind) << " param " << k << " analytic " << g(k) << " numeric " << num);
                CHECK(std::abs(g(k) - num) <= 1e-4 * std::max(1.0, std::abs(num)));
            }
            if (parents.empty()) CHECK(g(1) == 0.0);
            if (kind != ScoreKind::ours) CHECK(g(0) == 0.0);
        }
    }
}

TEST_CASE("scores are invariant under sample permutation") {
    Rng rng(9);
    const auto data = testutil::random_dataset(rng, 15, {1, 2, 1});
    std::vector<int> perm(15);
    for (int i = 0; i < 15; ++i) perm[static_cast<std::size_t>(i)] = (7 * i + 3) % 15;
    const auto shuffled = data.permuted(perm);
    const std::vector<int> parents{1, 2};
    const ScoreParams p{0.9, 1.4, 0.3};
    for (auto kind : {ScoreKind::ours, ScoreKind::marg, ScoreKind::gp}) {
        const double a = local_score_value(data, 0, parents, kind, p);
        const double b = local_score_value(shuffled, 0, parents, kind, p);
        CHECK(rel_err(a, b) <= 1e-12);
    }
}

TEST_CASE("score rejects degenerate inputs") {
    Eigen::MatrixXd x(4, 2);
    x << 1, 0.1, 1, 0.5, 1, -0.3, 1, 0.9;
    const auto data = testutil::columns_dataset(x);
    CHECK_THROWS_AS(joint_marginal_score(data, 0, {}, ScoreParams{}), DegenerateDataError);
    // Marg has no Jacobian term and stays finite.
    CHECK(std::isfinite(local_score_value(data, 0, {}, ScoreKind::marg, ScoreParams{})));

    const std::vector<int> self{0};
    CHECK_THROWS_AS(joint_marginal_score(data, 0, self, ScoreParams{}), std::invalid_argument);
    Eigen::MatrixXd one(1, 1);
    one << 0.0;
    CHECK_THROWS_AS(joint_marginal_score(testutil::columns_dataset(one), 0, {}, ScoreParams{}),
                    std::invalid_argument);
}

TEST_CASE("optimizer improves on its starting point and respects the box") {
    Rng rng(21);
    for (auto kind : {ScoreKind::ours, ScoreKind::marg, ScoreKind::gp}) {
        const auto data = standardized(testutil::random_dataset(rng, 40, {1, 1}));
        const std::vector<int> parents{1};
        const FamilyModel model(data, 0, parents);
        const double init = model.value(kind, initial_params(model));
        const auto res = optimize_local_score(data, 0, parents, kind);
        CHECK(res.value >= init);
        CHECK(within_bounds(res.params));
        CHECK(std::isfinite(res.value));
        const auto again = optimize_local_score(data, 0, parents, kind);
        CHECK(again.value == res.value);
        CHECK(again.params.sigma_x == res.params.sigma_x);
        CHECK(again.params.sigma_p == res.params.sigma_p);
        CHECK(again.params.sigma_eps == res.params.sigma_eps);
    }
}

TEST_CASE("marg baseline pins sigma_x and drops the jacobian term") {
    Rng rng(3);
    const auto data = standardized(testutil::random_dataset(rng, 30, {1, 1}));
    const std::vector<int> parents{1};
    const auto res = baseline_marg_score(data, 0, parents);
    const FamilyModel model(data, 0, parents);
    CHECK(res.params.sigma_x == model.target_bandwidth().value);
    const double joint = joint_marginal_score(data, 0, parents, res.params);
    const double jac = jacobian_term(data.block(0), res.params.sigma_x).value;
    CHECK(res.value == doctest::Approx(joint - jac).epsilon(1e-12));
}

TEST_CASE("gp root family with zero parent kernel has the closed-form maximizer") {
    Rng rng(8);
    Eigen::MatrixXd x(50, 1);
    for (int i = 0; i < 50; ++i) x(i, 0) = 0.3 + 0.8 * rng.normal();
    const auto data = testutil::columns_dataset(x);
    ScoreOptions opts;
    opts.root = RootKernel::zero;
    const auto res = baseline_gp_score(data, 0, {}, opts);
    const double s2 = x.squaredNorm() / 50.0;
    CHECK(res.params.sigma_eps * res.params.sigma_eps == doctest::Approx(s2).epsilon(1e-4));
    const double best = -0.5 * 50.0 - 25.0 * std::log(s2) - 25.0 * kLog2Pi;
    CHECK(res.value == doctest::Approx(best).epsilon(1e-8));
}

TEST_CASE("gp score is additive over target dimensions") {
    Rng rng(13);
    const auto wide = testutil::random_dataset(rng, 12, {2, 1});
    Eigen::MatrixXd split(12, 3);
    split << wide.values();
    const auto narrow = testutil::columns_dataset(split);
    const ScoreParams p{1.0, 0.8, 0.4};
    const std::vector<int> pa_wide{1};
    const std::vector<int> pa_narrow{2};
    const double whole = local_score_value(wide, 0, pa_wide, ScoreKind::gp, p);
    const double parts = local_score_value(narrow, 0, pa_narrow, ScoreKind::gp, p) +
                         local_score_value(narrow, 1, pa_narrow, ScoreKind::gp, p);
    CHECK(whole == doctest::Approx(parts).epsilon(1e-12));
}

TEST_CASE("score cache canonicalizes parent sets") {
    const auto a = ScoreCache::make_key(2, std::vector<int>{3, 1, 1}, ScoreKind::ours);
    const auto b = ScoreCache::make_key(2, std::vector<int>{1, 3}, ScoreKind::ours);
    CHECK(a == b);
    CHECK_FALSE(a == ScoreCache::make_key(2, std::vector<int>{1, 3}, ScoreKind::marg));
}

TEST_CASE("graph score is decomposable and cached") {
    Rng rng(17);
    const auto data = testutil::random_dataset(rng, 25, {1, 1, 1});
    auto cache = std::make_shared<ScoreCache>();
    KernelScorer scorer(data, ScoreKind::ours, cache);

    const Dag empty(3);
    const double e = graph_score(scorer, empty);
    CHECK(e == doctest::Approx(scorer.local_score(0, {}) + scorer.local_score(1, {}) + scorer.local_score(2, {}))
                   .epsilon(1e-15));

    const Dag one = Dag::from_edges(3, {{0, 2}});
    const Dag two = Dag::from_edges(3, {{0, 2}, {1, 2}});
    const double diff = graph_score(scorer, two) - graph_score(scorer, one);
    CHECK(diff == doctest::Approx(scorer.local_score(2, {0, 1}) - scorer.local_score(2, {0})).epsilon(1e-12));

    const auto before = scorer.optimizations();
    graph_score(scorer, two);
    CHECK(scorer.optimizations() == before);

    KernelScorer shared(data, ScoreKind::ours, cache);
    graph_score(shared, two);
    CHECK(shared.optimizations() == 0);
}

TEST_CASE("scorer failures name the family") {
    Eigen::MatrixXd x(5, 2);
    x << 1, 0.2, 1, 0.5, 1, -0.1, 1, 0.7, 1, 0.3;
    KernelScorer scorer(testutil::columns_dataset(x), ScoreKind::ours);
    try {
        scorer.local_score(0, {1});
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("V0 | {V1}") != std::string::npos);
    }
}
