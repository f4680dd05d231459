#include <doctest.h>

#include <random>

#include "fedcaus/graph.hpp"
#include "fedcaus/pdag.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fedcaus;
using th::dag;
using th::g;

namespace {
const Dag kTriangle = dag(3, "A -> B, B -> C, A -> C");
}

TEST_SUITE("graph") {

TEST_CASE("skeleton drops orientation") {
    CHECK(skeleton(kTriangle) == g(3, "A -- B, B -- C, A -- C"));
    CHECK(skeleton(Pdag(3)) == Pdag(3));
    CHECK(skeleton(g(2, "A -- B")) == g(2, "A -- B"));
}

TEST_CASE("v-structures are unshielded colliders") {
    CHECK(v_structures(g(3, "B -> C, A -> C")) == std::vector<VStructure>{{0, 2, 1}});
    CHECK(v_structures(kTriangle).empty());
    CHECK(v_structures(g(3, "A -- B, B -- C, A -- C")).empty());
    CHECK(v_structures(g(3, "A -- C, B -> C")).empty());
}

TEST_CASE("intersect") {
    SUBCASE("client intersection keeps directed marks and drops missing pairs") {
        const Pdag h = g(3, "B -> C, A -> C");
        CHECK(intersect(h, g(3, "A -- B, B -- C, A -- C")) == h);
    }
    SUBCASE("idempotent") {
        std::mt19937_64 rng(3);
        for (int t = 0; t < 200; ++t) {
            const Pdag x = th::random_pdag(5, rng);
            CHECK(intersect(x, x) == x);
        }
    }
    SUBCASE("opposite directions") {
        CHECK(intersect(g(2, "A -> B"), g(2, "B -> A")) == g(2, "A -- B"));
        CHECK(intersect(g(2, "A -> B"), g(2, "B -> A"), ConflictRule::Absent) == Pdag(2));
    }
    SUBCASE("full mark table is commutative and follows the rules") {
        for (auto rule : {ConflictRule::Undirected, ConflictRule::Absent}) {
            for (int x = 0; x < 4; ++x) {
                for (int y = 0; y < 4; ++y) {
                    Pdag a(2), b(2);
                    const auto mx = static_cast<EdgeMark>(x), my = static_cast<EdgeMark>(y);
                    a.set_mark(0, 1, mx);
                    b.set_mark(0, 1, my);
                    const EdgeMark r = intersect(a, b, rule).mark(0, 1);
                    CHECK(r == intersect(b, a, rule).mark(0, 1));
                    EdgeMark want;
                    if (mx == EdgeMark::Absent || my == EdgeMark::Absent) want = EdgeMark::Absent;
                    else if (mx == EdgeMark::Undirected) want = my;
                    else if (my == EdgeMark::Undirected) want = mx;
                    else if (mx == my) want = mx;
                    else want = rule == ConflictRule::Absent ? EdgeMark::Absent : EdgeMark::Undirected;
                    CHECK(r == want);
                }
            }
        }
    }
    SUBCASE("size mismatch") { CHECK_THROWS_WITH_AS(intersect(Pdag(2), Pdag(3)), "node count differs", std::invalid_argument); }
}

TEST_CASE("includes") {
    CHECK(includes(g(3, "A -- B, B -- C, A -- C"), g(3, "B -> C, A -> C")));
    CHECK_FALSE(includes(Pdag(2), g(2, "A -> B")));
    CHECK_FALSE(includes(g(2, "B -> A"), g(2, "A -> B")));
    std::mt19937_64 rng(11);
    for (int t = 0; t < 1000; ++t) {
        const Pdag x = th::random_pdag(5, rng), y = th::random_pdag(5, rng);
        CHECK(includes(x, x));
        CHECK(includes(x, intersect(x, y)));
    }
}

TEST_CASE("mutilate") {
    CHECK(mutilate(kTriangle, ClientTargets{{{1, {0}}}, {}}) == dag(3, "B -> C, A -> C"));
    CHECK(mutilate(kTriangle, ClientTargets{}) == kTriangle);
    CHECK(mutilate(dag(2, "A -> B"), ClientTargets{{{1, {0}}}, {}}) == Dag::empty(2));
    CHECK_THROWS_WITH_AS(mutilate(kTriangle, ClientTargets{{{0, {1}}}, {}}), "not an incoming edge",
                         std::invalid_argument);
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
        const Dag base = th::random_dag(6, 6, rng);
        for (const auto& c : th::random_family(base, 3, rng).clients) {
            const Dag m = mutilate(base, c);
            CHECK(includes(base, m));
            CHECK(oracle::acyclic(m));
        }
    }
}

TEST_CASE("labels and topological order") {
    const Pdag x = g(3, "A -> B");
    CHECK(Pdag(2).label(1) == "V2");
    const auto order = kTriangle.topological_order();
    CHECK(order == std::vector<int>{0, 1, 2});
    CHECK(x.has_directed(0, 1));
    CHECK_FALSE(x.has_directed(1, 0));
    CHECK_THROWS_AS(Dag(g(2, "A -- B")), std::invalid_argument);
    CHECK_THROWS_AS(Dag(g(3, "A -> B, B -> C, C -> A")), std::invalid_argument);
}

}  // TEST_SUITE
