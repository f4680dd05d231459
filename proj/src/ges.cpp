#include "fedcaus/ges.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "fedcaus/pdag.hpp"

namespace fedcaus {

namespace {

bool is_clique(const Pdag& g, const std::vector<int>& nodes) {
    for (std::size_t a = 0; a < nodes.size(); ++a)
        for (std::size_t b = a + 1; b < nodes.size(); ++b)
            if (!g.adjacent(nodes[a], nodes[b])) return false;
    return true;
}

// Undirected neighbours of y that are adjacent to x.
std::vector<int> na_yx(const Pdag& g, int y, int x) {
    std::vector<int> out;
    for (int n : g.undirected_neighbors(y))
        if (n != x && g.adjacent(n, x)) out.push_back(n);
    return out;
}

// True if some semi-directed path from `from` reaches `to` avoiding `blocked`.
bool semi_directed_path(const Pdag& g, int from, int to, const std::vector<int>& blocked) {
    const int d = g.node_count();
    std::vector<char> seen(d, 0);
    for (int b : blocked) seen[b] = 1;
    std::deque<int> queue{from};
    seen[from] = 1;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        for (int v = 0; v < d; ++v) {
            if (seen[v] || v == u) continue;
            const EdgeMark m = g.mark(u, v);
            if (m != EdgeMark::Forward && m != EdgeMark::Undirected) continue;
            if (v == to) return true;
            seen[v] = 1;
            queue.push_back(v);
        }
    }
    return false;
}

std::vector<int> set_union(std::vector<int> a, const std::vector<int>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

std::vector<int> without(std::vector<int> a, int v) {
    a.erase(std::remove(a.begin(), a.end(), v), a.end());
    return a;
}

Cpdag rebuild(const Pdag& p) {
    auto ext = consistent_extension(p);
    if (!ext) throw std::logic_error("operator produced a PDAG without a consistent extension");
    return cpdag_of(*ext);
}

}  // namespace

std::vector<InsertOp> enumerate_inserts(const Pdag& g, int max_parents) {
    const int d = g.node_count();
    std::vector<InsertOp> out;
    for (int x = 0; x < d; ++x) {
        for (int y = 0; y < d; ++y) {
            if (x == y || g.adjacent(x, y)) continue;
            const auto na = na_yx(g, y, x);
            if (!is_clique(g, na)) continue;
            std::vector<int> t0;
            for (int t : g.undirected_neighbors(y))
                if (!g.adjacent(t, x)) t0.push_back(t);
            const int base_parents = static_cast<int>(set_union(g.parents(y), na).size()) + 1;

            // Depth-first over subsets of t0 that keep na + t a clique.
            std::vector<int> t;
            auto visit = [&](auto&& self, std::size_t start) -> void {
                if (max_parents >= 0 && base_parents + static_cast<int>(t.size()) > max_parents) return;
                const auto cond = set_union(na, t);
                if (!semi_directed_path(g, y, x, cond)) out.push_back({x, y, t});
                for (std::size_t k = start; k < t0.size(); ++k) {
                    const int cand = t0[k];
                    bool ok = true;
                    for (int c : cond)
                        if (!g.adjacent(c, cand)) ok = false;
                    if (!ok) continue;
                    t.push_back(cand);
                    self(self, k + 1);
                    t.pop_back();
                }
            };
            visit(visit, 0);
        }
    }
    return out;
}

std::vector<DeleteOp> enumerate_deletes(const Pdag& g) {
    const int d = g.node_count();
    std::vector<DeleteOp> out;
    for (int x = 0; x < d; ++x) {
        for (int y = 0; y < d; ++y) {
            if (x == y) continue;
            const EdgeMark m = g.mark(x, y);
            if (m != EdgeMark::Forward && m != EdgeMark::Undirected) continue;
            const auto na = na_yx(g, y, x);
            if (na.size() > 20) throw std::runtime_error("neighbourhood too large for delete enumeration");
            const std::uint32_t full = (std::uint32_t{1} << na.size()) - 1;
            for (std::uint32_t mask = 0; mask <= full; ++mask) {
                std::vector<int> h, rest;
                for (std::size_t k = 0; k < na.size(); ++k) (mask >> k & 1u ? h : rest).push_back(na[k]);
                if (is_clique(g, rest)) out.push_back({x, y, h});
            }
        }
    }
    return out;
}

double insert_delta(const BicScorer& scorer, const Pdag& g, const InsertOp& op) {
    const auto base = set_union(set_union(g.parents(op.y), na_yx(g, op.y, op.x)), op.t);
    return scorer.local(op.y, set_union(base, {op.x})) - scorer.local(op.y, base);
}

double delete_delta(const BicScorer& scorer, const Pdag& g, const DeleteOp& op) {
    std::vector<int> rest;
    for (int n : na_yx(g, op.y, op.x))
        if (std::find(op.h.begin(), op.h.end(), n) == op.h.end()) rest.push_back(n);
    const auto base = without(set_union(rest, g.parents(op.y)), op.x);
    return scorer.local(op.y, base) - scorer.local(op.y, set_union(base, {op.x}));
}

Cpdag apply_insert(const Pdag& g, const InsertOp& op) {
    Pdag p = g;
    p.add_directed(op.x, op.y);
    for (int t : op.t) p.add_directed(t, op.y);
    return rebuild(p);
}

Cpdag apply_delete(const Pdag& g, const DeleteOp& op) {
    Pdag p = g;
    p.remove_edge(op.x, op.y);
    for (int h : op.h) {
        p.add_directed(op.y, h);
        if (p.has_undirected(op.x, h)) p.add_directed(op.x, h);
    }
    return rebuild(p);
}

std::string describe(const InsertOp& op) {
    std::ostringstream os;
    os << "insert " << op.x << "->" << op.y << " T={";
    for (std::size_t k = 0; k < op.t.size(); ++k) os << (k ? "," : "") << op.t[k];
    os << '}';
    return os.str();
}

std::string describe(const DeleteOp& op) {
    std::ostringstream os;
    os << "delete " << op.x << "-" << op.y << " H={";
    for (std::size_t k = 0; k < op.h.size(); ++k) os << (k ? "," : "") << op.h[k];
    os << '}';
    return os.str();
}

Cpdag ges_fit(const BicScorer& scorer, const GesConfig& cfg) {
    const int d = scorer.node_count();
    if (cfg.forward_tolerance < 0.0 || cfg.backward_tolerance < 0.0)
        throw std::invalid_argument("tolerances must be non-negative");
    if (cfg.max_parents == 0 || cfg.max_parents < -1) throw std::invalid_argument("max_parents must be at least 1");
    const int max_parents = cfg.max_parents < 0 ? d - 1 : cfg.max_parents;
    if (scorer.sample_count() <= max_parents + 1) throw std::invalid_argument("too few samples for max_parents");
    const int cap = cfg.iteration_cap < 0 ? 10 * d * d : cfg.iteration_cap;

    Cpdag g = Cpdag::empty(d);
    int steps = 0;
    while (steps < cap) {
        const auto ops = enumerate_inserts(g, max_parents);
        const InsertOp* best = nullptr;
        double best_delta = cfg.forward_tolerance;
        for (const auto& op : ops) {
            const double delta = insert_delta(scorer, g, op);
            if (delta > best_delta) {
                best_delta = delta;
                best = &op;
            }
        }
        if (!best) break;
        g = apply_insert(g, *best);
        ++steps;
    }
    while (steps < cap) {
        const auto ops = enumerate_deletes(g);
        const DeleteOp* best = nullptr;
        double best_delta = cfg.backward_tolerance;
        for (const auto& op : ops) {
            const double delta = delete_delta(scorer, g, op);
            if (delta > best_delta) {
                best_delta = delta;
                best = &op;
            }
        }
        if (!best) break;
        g = apply_delete(g, *best);
        ++steps;
    }
    return g;
}

Cpdag local_discovery(const BicScorer& scorer, const std::string& method, const Cpdag* oracle, const GesConfig& cfg) {
    if (method == "ges") return ges_fit(scorer, cfg);
    if (method == "oracle") {
        if (!oracle) throw std::invalid_argument("oracle method needs a CPDAG");
        if (oracle->node_count() != scorer.node_count()) throw std::invalid_argument("node count differs");
        return *oracle;
    }
    throw std::invalid_argument("unknown discovery method '" + method + "'");
}

}  // namespace fedcaus
