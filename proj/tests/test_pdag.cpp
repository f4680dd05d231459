#include <doctest.h>

#include <random>
#include <set>

#include "fedcaus/pdag.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fedcaus;
using th::dag;
using th::g;

namespace {

const std::vector<Dag>& universe(int d) {
    static std::map<int, std::vector<Dag>> cache;
    auto it = cache.find(d);
    if (it == cache.end()) it = cache.emplace(d, oracle::all_dags(d)).first;
    return it->second;
}

const Dag kTriangle = dag(3, "A -> B, B -> C, A -> C");
const ClientTargets kCutB{{{1, {0}}}, {}};

// Orients a random subset of the CPDAG's undirected edges as in the DAG.
Pdag partially_oriented(const Dag& d, std::mt19937_64& rng) {
    Pdag p = cpdag_of(d).pdag();
    for (int i = 0; i < d.node_count(); ++i)
        for (int j = i + 1; j < d.node_count(); ++j)
            if (p.has_undirected(i, j) && rng() % 3 == 0) {
                if (d.has_edge(i, j)) p.add_directed(i, j);
                else p.add_directed(j, i);
            }
    return p;
}

}  // namespace

TEST_SUITE("pdag") {

TEST_CASE("cpdag of small graphs") {
    CHECK(cpdag_of(kTriangle).pdag() == g(3, "A -- B, B -- C, A -- C"));
    CHECK(cpdag_of(dag(3, "A -> C, B -> C")).pdag() == g(3, "A -> C, B -> C"));
    CHECK(cpdag_of(dag(3, "A -> B, B -> C")).pdag() == g(3, "A -- B, B -- C"));
}

TEST_CASE("cpdag matches equivalence-class enumeration") {
    for (int d : {3, 4}) {
        const auto& all = universe(d);
        for (const auto& x : all) {
            const Pdag want = oracle::cpdag(x, all);
            CHECK(cpdag_of(x).pdag() == want);
            CHECK(is_cpdag(want));
        }
    }
}

TEST_CASE("is_cpdag rejects non-canonical graphs") {
    CHECK_FALSE(is_cpdag(g(3, "A -> B, B -- C")));
    CHECK_FALSE(is_cpdag(g(3, "A -> B, B -> C")));
    CHECK(is_cpdag(g(3, "A -> C, B -> C")));
    std::set<std::vector<int>> seen;
    const auto& all = universe(4);
    std::vector<Pdag> cpdags;
    for (const auto& x : all) cpdags.push_back(oracle::cpdag(x, all));
    std::mt19937_64 rng(17);
    for (int t = 0; t < 400; ++t) {
        const Pdag p = th::random_pdag(4, rng);
        const bool want = std::find(cpdags.begin(), cpdags.end(), p) != cpdags.end();
        CHECK(is_cpdag(p) == want);
    }
}

TEST_CASE("complete_pdag agrees with background-knowledge enumeration") {
    std::mt19937_64 rng(23);
    for (int d : {4, 5}) {
        const auto& all = universe(d);
        for (int t = 0; t < (d == 4 ? 300 : 60); ++t) {
            const Dag x = all[rng() % all.size()];
            const Pdag p = partially_oriented(x, rng);
            std::vector<const Dag*> members;
            for (const Dag* h : oracle::extensions(p, all))
                if (oracle::markov_equivalent(*h, x)) members.push_back(h);
            CHECK(complete_pdag(p) == oracle::common_pattern(members, d));
        }
    }
}

TEST_CASE("complete_pdag fixed points and R1") {
    const Pdag r1 = g(4, "A -> C, B -> C, C -- D");
    CHECK(complete_pdag(r1) == g(4, "A -> C, B -> C, C -> D"));
    const Pdag c = cpdag_of(kTriangle).pdag();
    CHECK(complete_pdag(c) == c);
    CHECK(complete_pdag(kTriangle) == kTriangle.pdag());
    CHECK_THROWS_WITH_AS(complete_pdag(g(3, "A -> B, B -> C, C -> A")), "inconsistent PDAG", InconsistentPdag);
}

TEST_CASE("consistent extension") {
    const auto ext = consistent_extension(g(3, "A -- B, B -- C, A -- C"));
    REQUIRE(ext);
    CHECK(oracle::vstructs(*ext).empty());
    CHECK(consistent_extension(g(3, "A -> C, B -> C")) == dag(3, "A -> C, B -> C"));
    CHECK_FALSE(consistent_extension(g(4, "A -- B, B -- C, C -- D, D -- A")));

    std::mt19937_64 rng(29);
    for (int d : {4, 5}) {
        const auto& all = universe(d);
        for (int t = 0; t < (d == 4 ? 400 : 40); ++t) {
            const Pdag p = th::random_pdag(d, rng);
            bool exists = false;
            for (const Dag* h : oracle::extensions(p, all))
                if (oracle::vstructs(*h) == oracle::vstructs(p)) exists = true;
            const auto got = consistent_extension(p);
            CHECK(got.has_value() == exists);
            if (got) {
                CHECK(oracle::skel(*got) == oracle::skel(p));
                CHECK(oracle::vstructs(*got) == oracle::vstructs(p));
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j)
                        if (p.has_directed(i, j)) CHECK(got->has_edge(i, j));
            }
        }
    }
}

TEST_CASE("phi cpdag") {
    const InterventionFamily fam{{{}, kCutB}};
    CHECK(phi_cpdag(kTriangle, fam) == g(3, "A -- B, B -> C, A -> C"));
    CHECK(phi_cpdag(kTriangle, InterventionFamily{{{}, {}}}) == cpdag_of(kTriangle).pdag());

    const Dag five = dag(5, "A -> B, A -> C, B -> C, B -> D, B -> E, D -> E");
    const InterventionFamily five_fam{{{}, {{{1, {0}}}, {}}, {{{3, {1}}}, {}}}};
    const Pdag phi = phi_cpdag(five, five_fam);
    CHECK(phi.has_directed(0, 2));
    CHECK(phi.has_directed(1, 2));
    CHECK(phi.has_directed(1, 4));
    CHECK(phi.has_directed(3, 4));
    CHECK(phi == oracle::phi_cpdag(five, five_fam, universe(5)));
}

TEST_CASE("phi cpdag matches constrained class enumeration") {
    std::mt19937_64 rng(31);
    for (int d : {3, 4}) {
        const auto& all = universe(d);
        for (int t = 0; t < 300; ++t) {
            const Dag x = all[rng() % all.size()];
            const auto fam = th::random_family(x, 1 + static_cast<int>(rng() % 3), rng);
            const Pdag phi = phi_cpdag(x, fam);
            CHECK(phi == oracle::phi_cpdag(x, fam, all));
            CHECK(oracle::skel(phi) == oracle::skel(x));
            for (const auto& c : fam.clients) CHECK(includes(phi, cpdag_of(mutilate(x, c)).pdag()));
        }
    }
}

TEST_CASE("phi markov equivalence") {
    SUBCASE("edge pair with swapped targets") {
        const InterventionFamily f1{{{}, {{{1, {0}}}, {}}}}, f2{{{}, {{{0, {1}}}, {}}}};
        CHECK(phi_markov_equivalent(dag(2, "A -> B"), f1, dag(2, "B -> A"), f2));
    }
    SUBCASE("different mutilated skeletons") {
        const Dag g1 = dag(5, "A -> B, A -> C, B -> C, B -> D, D -> E, B -> E");
        const Dag g2 = dag(5, "B -> A, A -> C, B -> C, D -> B, D -> E, B -> E");
        const InterventionFamily f1{{{}, {{{1, {0}}}, {}}, {{{3, {1}}}, {}}}};
        const InterventionFamily f2{{{}, {}, {{{0, {1}}, {1, {3}}}, {}}}};
        CHECK(phi_markov_equivalent(g1, f1, g2, f2));
        CHECK(phi_cpdag(g1, f1) == phi_cpdag(g2, f2));
    }
    SUBCASE("equivalent pairs share one interventional CPDAG") {
        std::mt19937_64 rng(31);
        const auto& all = universe(4);
        int equivalent = 0;
        for (int t = 0; t < 3000; ++t) {
            const Dag& x = all[rng() % all.size()];
            std::vector<const Dag*> mec;
            for (const auto& y : all)
                if (oracle::markov_equivalent(x, y)) mec.push_back(&y);
            const Dag& y = *mec[rng() % mec.size()];
            const auto fx = th::random_family(x, 1 + static_cast<int>(rng() % 3), rng);
            const auto fy = th::random_family(y, 1 + static_cast<int>(rng() % 3), rng);
            if (!phi_markov_equivalent(x, fx, y, fy)) continue;
            ++equivalent;
            CHECK(phi_cpdag(x, fx) == phi_cpdag(y, fy));
        }
        CHECK(equivalent > 300);
    }
    SUBCASE("equal interventional CPDAGs without equivalence") {
        // The induced collider 1 -> 0 <- 3 is already compelled in the
        // observational class, so it changes nothing in the output graph.
        const Dag x = dag(4, "B -> A, D -> A, C -> B, D -> B");
        const InterventionFamily cut{{{}, {{{1, {2, 3}}}, {}}}}, none{{{}, {}}};
        CHECK(phi_cpdag(x, cut) == phi_cpdag(x, none));
        CHECK_FALSE(phi_markov_equivalent(x, cut, x, none));
    }
    SUBCASE("chain against collider") {
        const InterventionFamily f{{{}}};
        CHECK_FALSE(phi_markov_equivalent(dag(3, "A -> B, B -> C"), f, dag(3, "A -> B, C -> B"), f));
    }
}

}  // TEST_SUITE
