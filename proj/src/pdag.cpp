#include "fedcaus/pdag.hpp"

#include <algorithm>
#include <iterator>
#include <set>

namespace fedcaus {

namespace {

// a - b becomes a -> b?
bool meek_orients(const Pdag& g, int a, int b) {
    const int d = g.node_count();
    for (int c = 0; c < d; ++c) {
        if (c == a || c == b) continue;
        // R1: c -> a - b, c and b non-adjacent.
        if (g.has_directed(c, a) && !g.adjacent(c, b)) return true;
        // R2: a -> c -> b.
        if (g.has_directed(a, c) && g.has_directed(c, b)) return true;
    }
    for (int c = 0; c < d; ++c) {
        if (c == a || c == b) continue;
        for (int e = c + 1; e < d; ++e) {
            if (e == a || e == b || g.adjacent(c, e)) continue;
            // R3: a - c -> b, a - e -> b, c and e non-adjacent.
            if (g.has_undirected(a, c) && g.has_undirected(a, e) && g.has_directed(c, b) && g.has_directed(e, b))
                return true;
        }
    }
    for (int k = 0; k < d; ++k) {
        if (k == a || k == b || !g.adjacent(a, k) || g.adjacent(k, b)) continue;
        for (int l = 0; l < d; ++l) {
            if (l == a || l == b || l == k) continue;
            // R4: k -> l -> b with a adjacent to k and l, k and b non-adjacent.
            if (g.has_directed(k, l) && g.has_directed(l, b) && g.adjacent(a, l)) return true;
        }
    }
    return false;
}

}  // namespace

Pdag complete_pdag(const Pdag& g) {
    if (g.has_directed_cycle()) throw InconsistentPdag("inconsistent PDAG");
    Pdag out = g;
    const int d = g.node_count();
    bool changed = true;
    while (changed) {
        changed = false;
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) {
                if (a == b || !out.has_undirected(a, b)) continue;
                if (meek_orients(out, a, b)) {
                    out.add_directed(a, b);
                    changed = true;
                }
            }
        }
    }
    if (out.has_directed_cycle()) throw InconsistentPdag("inconsistent PDAG");
    return out;
}

std::optional<Dag> consistent_extension(const Pdag& g) {
    const int d = g.node_count();
    Pdag work = g;
    Pdag result(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j && g.has_directed(i, j)) result.add_directed(i, j);
    result.share_labels(g);

    std::vector<bool> alive(d, true);
    for (int removed = 0; removed < d; ++removed) {
        int pick = -1;
        for (int x = 0; x < d && pick < 0; ++x) {
            if (!alive[x]) continue;
            bool sink = true;
            for (int y = 0; y < d && sink; ++y)
                if (y != x && alive[y] && work.has_directed(x, y)) sink = false;
            if (!sink) continue;
            bool ok = true;
            for (int y = 0; y < d && ok; ++y) {
                if (y == x || !alive[y] || !work.has_undirected(x, y)) continue;
                for (int z = 0; z < d && ok; ++z) {
                    if (z == x || z == y || !alive[z] || !work.adjacent(x, z)) continue;
                    if (!work.adjacent(y, z)) ok = false;
                }
            }
            if (ok) pick = x;
        }
        if (pick < 0) return std::nullopt;
        for (int y = 0; y < d; ++y)
            if (y != pick && alive[y] && work.has_undirected(pick, y)) result.add_directed(y, pick);
        alive[pick] = false;
    }
    return Dag(std::move(result));
}

Cpdag cpdag_of(const Dag& g) {
    Pdag p = skeleton(g);
    for (const auto& v : v_structures(g)) {
        p.add_directed(v.a, v.c);
        p.add_directed(v.b, v.c);
    }
    return detail::trust_cpdag(complete_pdag(p));
}

bool is_cpdag(const Pdag& g) {
    if (g.has_directed_cycle()) return false;
    auto ext = consistent_extension(g);
    if (!ext) return false;
    return cpdag_of(*ext).pdag() == g;
}

Cpdag::Cpdag(Pdag g) : g_(std::move(g)) {
    if (!is_cpdag(g_)) throw std::invalid_argument("graph is not a CPDAG");
}

std::vector<VStructure> induced_v_structures(const Dag& g, const ClientTargets& targets) {
    const auto base = v_structures(g);
    const auto cut = v_structures(mutilate(g, targets));
    std::vector<VStructure> out;
    std::set_difference(cut.begin(), cut.end(), base.begin(), base.end(), std::back_inserter(out));
    return out;
}

Pdag phi_cpdag(const Dag& g, const InterventionFamily& family) {
    Pdag p = cpdag_of(g).pdag();
    for (const auto& client : family.clients) {
        for (const auto& v : v_structures(mutilate(g, client))) {
            p.add_directed(v.a, v.c);
            p.add_directed(v.b, v.c);
        }
    }
    return complete_pdag(p);
}

bool phi_markov_equivalent(const Dag& g1, const InterventionFamily& fam1, const Dag& g2,
                           const InterventionFamily& fam2) {
    if (g1.node_count() != g2.node_count()) throw std::invalid_argument("node count differs");
    if (!(skeleton(g1) == skeleton(g2))) return false;
    if (v_structures(g1) != v_structures(g2)) return false;
    auto induced = [](const Dag& g, const InterventionFamily& fam) {
        std::set<VStructure> all;
        for (const auto& client : fam.clients)
            for (const auto& v : induced_v_structures(g, client)) all.insert(v);
        return all;
    };
    return induced(g1, fam1) == induced(g2, fam2);
}

}  // namespace fedcaus
