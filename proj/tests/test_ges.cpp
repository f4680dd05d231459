#include <doctest.h>

#include <random>

#include "fedcaus/ges.hpp"
#include "fedcaus/pdag.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fedcaus;
using th::dag;
using th::g;

namespace {

Dataset sample(const Dag& d, int n, std::uint64_t seed) {
    return sample_client(sample_weights(d, seed), {0, n, {}, seed + 7});
}

}  // namespace

TEST_SUITE("ges") {

TEST_CASE("recovers small structures") {
    // Random weights on the triangle often nearly cancel along the two
    // paths, so its weights are fixed and only the sample varies.
    LinearSem triangle_sem = sample_weights(dag(3, "A -> B, B -> C, A -> C"), 0);
    triangle_sem.weights(0, 1) = 0.8;
    triangle_sem.weights(1, 2) = 0.6;
    triangle_sem.weights(0, 2) = 0.7;
    int collider = 0, empty = 0, triangle = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const Dag v = dag(3, "A -> C, B -> C");
        collider += ges_fit(BicScorer(sample(v, 5000, s))).pdag() == v.pdag();
        empty += ges_fit(BicScorer(sample(Dag::empty(3), 5000, s))).pdag() == Pdag(3);
        const Dataset tri = sample_client(triangle_sem, {0, 5000, {}, s});
        triangle += ges_fit(BicScorer(tri)).pdag() == g(3, "A -- B, B -- C, A -- C");
    }
    CHECK(collider >= 95);
    CHECK(empty >= 95);
    CHECK(triangle >= 90);
}

TEST_CASE("two correlated columns give one undirected edge") {
    const BicScorer scorer(sample(dag(2, "A -> B"), 5000, 3));
    CHECK(local_discovery(scorer, "ges").pdag() == g(2, "A -- B"));
}

TEST_CASE("oracle mode passes through") {
    const Dag t = dag(4, "A -> B, C -> B, B -> D");
    const BicScorer scorer(sample(t, 100, 1));
    const Cpdag c = cpdag_of(t);
    CHECK(local_discovery(scorer, "oracle", &c) == c);
    CHECK_THROWS_AS(local_discovery(scorer, "oracle"), std::invalid_argument);
    CHECK_THROWS_AS(local_discovery(scorer, "pc"), std::invalid_argument);
}

TEST_CASE("matches exhaustive search with population covariance") {
    const auto all = oracle::all_dags(4);
    for (std::uint64_t s = 0; s < 40; ++s) {
        const Dag t = erdos_renyi_dag(4, 4, s);
        const BicScorer scorer(implied_covariance(sample_weights(t, s), {}), 1000000);
        const Dag* best = oracle::best_dag(all, [&](const Dag& x) { return score_dag(scorer, x); });
        CHECK(ges_fit(scorer) == cpdag_of(*best));
    }
}

TEST_CASE("operator deltas equal full rescoring") {
    std::mt19937_64 rng(41);
    for (std::uint64_t s = 0; s < 30; ++s) {
        const Dag t = erdos_renyi_dag(6, 6, s);
        const BicScorer scorer(sample(t, 2000, s));
        // Walk a few random inserts from the empty graph, checking each.
        Cpdag cur = Cpdag::empty(6);
        for (int step = 0; step < 5; ++step) {
            const auto ins = enumerate_inserts(cur);
            if (ins.empty()) break;
            const auto& op = ins[rng() % ins.size()];
            const Cpdag next = apply_insert(cur, op);
            CHECK(is_cpdag(next));
            CHECK(score_pdag(scorer, next) - score_pdag(scorer, cur) == doctest::Approx(insert_delta(scorer, cur, op)).epsilon(1e-9));
            cur = next;
        }
        for (const auto& op : enumerate_deletes(cur)) {
            const Cpdag next = apply_delete(cur, op);
            CHECK(is_cpdag(next));
            CHECK(score_pdag(scorer, next) - score_pdag(scorer, cur) == doctest::Approx(delete_delta(scorer, cur, op)).epsilon(1e-9));
        }
    }
}

TEST_CASE("output is a completed graph and the search terminates") {
    for (std::uint64_t s = 0; s < 30; ++s) {
        const Dag t = erdos_renyi_dag(7, 7, s);
        const Cpdag out = ges_fit(BicScorer(sample(t, 500, s)));
        CHECK(is_cpdag(out));
        CHECK(complete_pdag(out) == out.pdag());
    }
    GesConfig capped;
    capped.iteration_cap = 1;
    CHECK(ges_fit(BicScorer(sample(dag(3, "A -> B, B -> C"), 2000, 1)), capped).pdag().edge_count() == 1);
    GesConfig bad;
    bad.max_parents = 0;
    CHECK_THROWS_AS(ges_fit(BicScorer(sample(Dag::empty(2), 50, 1)), bad), std::invalid_argument);
}

TEST_CASE("describe") {
    CHECK(describe(InsertOp{0, 1, {2}}) == "insert 0->1 T={2}");
    CHECK(describe(DeleteOp{0, 1, {}}) == "delete 0-1 H={}");
}

}  // TEST_SUITE
