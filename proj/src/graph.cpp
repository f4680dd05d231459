#include "fedcaus/graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace fedcaus {

EdgeMark reversed(EdgeMark m) {
    switch (m) {
        case EdgeMark::Forward: return EdgeMark::Backward;
        case EdgeMark::Backward: return EdgeMark::Forward;
        default: return m;
    }
}

Pdag::Pdag(int node_count) : d_(node_count) {
    if (node_count <= 0) throw std::invalid_argument("node count must be positive");
    adj_.assign(static_cast<std::size_t>(d_) * d_, 0);
}

Pdag::Pdag(int node_count, std::vector<std::string> labels) : Pdag(node_count) {
    set_labels(std::move(labels));
}

void Pdag::check_pair(int i, int j) const {
    if (i < 0 || j < 0 || i >= d_ || j >= d_) throw std::out_of_range("node index out of range");
    if (i == j) throw std::invalid_argument("self-loop");
}

EdgeMark Pdag::mark(int i, int j) const {
    check_pair(i, j);
    const bool ij = at(i, j), ji = at(j, i);
    if (ij && ji) return EdgeMark::Undirected;
    if (ij) return EdgeMark::Forward;
    if (ji) return EdgeMark::Backward;
    return EdgeMark::Absent;
}

void Pdag::set_mark(int i, int j, EdgeMark m) {
    check_pair(i, j);
    put(i, j, m == EdgeMark::Undirected || m == EdgeMark::Forward);
    put(j, i, m == EdgeMark::Undirected || m == EdgeMark::Backward);
}

std::vector<int> Pdag::parents(int i) const {
    std::vector<int> out;
    for (int j = 0; j < d_; ++j)
        if (j != i && has_directed(j, i)) out.push_back(j);
    return out;
}

std::vector<int> Pdag::children(int i) const {
    std::vector<int> out;
    for (int j = 0; j < d_; ++j)
        if (j != i && has_directed(i, j)) out.push_back(j);
    return out;
}

std::vector<int> Pdag::undirected_neighbors(int i) const {
    std::vector<int> out;
    for (int j = 0; j < d_; ++j)
        if (j != i && has_undirected(i, j)) out.push_back(j);
    return out;
}

std::vector<int> Pdag::neighbors(int i) const {
    std::vector<int> out;
    for (int j = 0; j < d_; ++j)
        if (j != i && adjacent(i, j)) out.push_back(j);
    return out;
}

int Pdag::edge_count() const {
    int n = 0;
    for (int i = 0; i < d_; ++i)
        for (int j = i + 1; j < d_; ++j) n += adjacent(i, j);
    return n;
}

int Pdag::undirected_count() const {
    int n = 0;
    for (int i = 0; i < d_; ++i)
        for (int j = i + 1; j < d_; ++j) n += has_undirected(i, j);
    return n;
}

int Pdag::directed_count() const { return edge_count() - undirected_count(); }

std::optional<std::vector<int>> Pdag::topological_order() const {
    std::vector<int> indegree(d_, 0);
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j)
            if (i != j && has_directed(i, j)) ++indegree[j];
    std::vector<int> order;
    order.reserve(d_);
    // Smallest ready index first so the order is canonical.
    std::vector<int> ready;
    for (int i = d_ - 1; i >= 0; --i)
        if (indegree[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
        std::sort(ready.begin(), ready.end(), std::greater<>());
        int v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (int w = 0; w < d_; ++w)
            if (w != v && has_directed(v, w) && --indegree[w] == 0) ready.push_back(w);
    }
    if (static_cast<int>(order.size()) != d_) return std::nullopt;
    return order;
}

std::string Pdag::label(int i) const {
    if (labels_) return (*labels_)[i];
    return "V" + std::to_string(i + 1);
}

std::vector<std::string> Pdag::labels() const {
    std::vector<std::string> out;
    out.reserve(d_);
    for (int i = 0; i < d_; ++i) out.push_back(label(i));
    return out;
}

void Pdag::set_labels(std::vector<std::string> labels) {
    if (labels.empty()) {
        labels_.reset();
        return;
    }
    if (static_cast<int>(labels.size()) != d_) throw std::invalid_argument("label count differs from node count");
    labels_ = std::make_shared<const std::vector<std::string>>(std::move(labels));
}

Dag::Dag(Pdag g) : g_(std::move(g)) {
    if (g_.undirected_count() != 0) throw std::invalid_argument("DAG contains undirected edges");
    if (g_.has_directed_cycle()) throw std::invalid_argument("DAG contains a directed cycle");
}

Cpdag Cpdag::empty(int node_count) { return Cpdag(Pdag(node_count), Trusted{}); }

namespace detail {
Cpdag trust_cpdag(Pdag g) { return Cpdag(std::move(g), Cpdag::Trusted{}); }
}  // namespace detail

Pdag skeleton(const Pdag& g) {
    Pdag out = g;
    const int d = g.node_count();
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (g.adjacent(i, j)) out.add_undirected(i, j);
    return out;
}

std::vector<VStructure> v_structures(const Pdag& g) {
    std::vector<VStructure> out;
    const int d = g.node_count();
    for (int c = 0; c < d; ++c) {
        const auto pa = g.parents(c);
        for (std::size_t x = 0; x < pa.size(); ++x)
            for (std::size_t y = x + 1; y < pa.size(); ++y)
                if (!g.adjacent(pa[x], pa[y])) out.push_back({pa[x], c, pa[y]});
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

void require_same_size(const Pdag& a, const Pdag& b) {
    if (a.node_count() != b.node_count()) throw std::invalid_argument("node count differs");
}

EdgeMark combine(EdgeMark x, EdgeMark y, ConflictRule rule) {
    if (x == EdgeMark::Absent || y == EdgeMark::Absent) return EdgeMark::Absent;
    if (x == EdgeMark::Undirected) return y;
    if (y == EdgeMark::Undirected) return x;
    if (x == y) return x;
    return rule == ConflictRule::Absent ? EdgeMark::Absent : EdgeMark::Undirected;
}

}  // namespace

Pdag intersect(const Pdag& g1, const Pdag& g2, ConflictRule rule) {
    require_same_size(g1, g2);
    Pdag out = g1;
    const int d = g1.node_count();
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) out.set_mark(i, j, combine(g1.mark(i, j), g2.mark(i, j), rule));
    return out;
}

bool includes(const Pdag& super_g, const Pdag& sub_g) {
    require_same_size(super_g, sub_g);
    const int d = sub_g.node_count();
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            const EdgeMark s = sub_g.mark(i, j);
            if (s == EdgeMark::Absent) continue;
            const EdgeMark t = super_g.mark(i, j);
            if (t == EdgeMark::Absent) return false;
            if (s == EdgeMark::Undirected || t == EdgeMark::Undirected) continue;
            if (s != t) return false;
        }
    }
    return true;
}

bool InterventionFamily::has_observational_client() const {
    return std::any_of(clients.begin(), clients.end(), [](const ClientTargets& c) { return c.observational(); });
}

void validate_family(const Dag& g, const InterventionFamily& family, bool allow_no_observational) {
    const int d = g.node_count();
    auto check_node = [d](int v) {
        if (v < 0 || v >= d) throw std::invalid_argument("intervention target out of range: " + std::to_string(v));
    };
    for (const auto& client : family.clients) {
        for (const auto& t : client.structural) {
            check_node(t.node);
            for (int p : t.removed_parents) {
                check_node(p);
                if (!g.has_edge(p, t.node)) throw std::invalid_argument("not an incoming edge");
            }
        }
        for (const auto& t : client.parametric) {
            check_node(t.node);
            if (!(t.noise_std > 0.0)) throw std::invalid_argument("parametric noise std must be positive");
        }
    }
    if (!allow_no_observational && !family.has_observational_client())
        throw std::invalid_argument("no observational client in intervention family");
}

Dag mutilate(const Dag& g, std::span<const StructuralTarget> targets) {
    Pdag out = g.pdag();
    for (const auto& t : targets) {
        for (int p : t.removed_parents) {
            if (p < 0 || p >= g.node_count() || p == t.node || !g.has_edge(p, t.node))
                throw std::invalid_argument("not an incoming edge");
            out.remove_edge(p, t.node);
        }
    }
    return Dag(std::move(out));
}

StructuralTarget full_structural_target(const Dag& g, int node) { return {node, g.parents(node)}; }

}  // namespace fedcaus
