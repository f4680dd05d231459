#pragma once

#include <random>
#include <string>

#include "fedcaus/graph.hpp"
#include "fedcaus/io.hpp"
#include "fedcaus/scm.hpp"

namespace th {

using namespace fedcaus;

/// "A->B B->C" style shorthand over letters, or explicit edge lines.
inline Pdag g(int d, const std::string& edges) {
    std::string text = "pdag d=" + std::to_string(d) + "\n";
    for (char ch : edges) text += ch == ',' ? '\n' : ch;
    return parse_graph(text);
}

inline Dag dag(int d, const std::string& edges) { return Dag(g(d, edges)); }

inline Pdag random_pdag(int d, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> mark(0, 3);
    Pdag out(d);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) out.set_mark(i, j, static_cast<EdgeMark>(mark(rng)));
    return out;
}

inline Dag random_dag(int d, double expected_edges, std::mt19937_64& rng) {
    return erdos_renyi_dag(d, expected_edges, rng());
}

/// Random family on g: client 0 observational, others cut random subsets of
/// incoming edges of one random node.
inline InterventionFamily random_family(const Dag& dag, int clients, std::mt19937_64& rng) {
    InterventionFamily f;
    f.clients.emplace_back();
    std::uniform_int_distribution<int> node(0, dag.node_count() - 1);
    for (int k = 1; k < clients; ++k) {
        ClientTargets t;
        const int v = node(rng);
        std::vector<int> removed;
        for (int p : dag.parents(v))
            if (rng() % 2) removed.push_back(p);
        if (!removed.empty()) t.structural.push_back({v, removed});
        f.clients.push_back(t);
    }
    return f;
}

}  // namespace th
