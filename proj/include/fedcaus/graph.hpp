#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedcaus {

/// State of an unordered node pair {i, j} as seen from i.
/// Forward means i -> j, Backward means j -> i.
enum class EdgeMark : std::uint8_t { Absent, Undirected, Forward, Backward };

EdgeMark reversed(EdgeMark m);

/// Raised when an orientation step produces a directed cycle.
class InconsistentPdag : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Partially directed graph over nodes 0..d-1.
///
/// Stored as a d x d endpoint table: cell (i, j) set means the pair carries
/// an edge that may point from i to j. i -> j sets only (i, j); i - j sets
/// both cells. Equality compares marks only; labels are presentation data.
class Pdag {
public:
    Pdag() = default;
    explicit Pdag(int node_count);
    Pdag(int node_count, std::vector<std::string> labels);

    int node_count() const { return d_; }

    EdgeMark mark(int i, int j) const;
    void set_mark(int i, int j, EdgeMark m);

    void add_directed(int from, int to) { set_mark(from, to, EdgeMark::Forward); }
    void add_undirected(int i, int j) { set_mark(i, j, EdgeMark::Undirected); }
    void remove_edge(int i, int j) { set_mark(i, j, EdgeMark::Absent); }

    bool adjacent(int i, int j) const { return at(i, j) || at(j, i); }
    /// Strictly directed i -> j.
    bool has_directed(int i, int j) const { return at(i, j) && !at(j, i); }
    bool has_undirected(int i, int j) const { return at(i, j) && at(j, i); }

    std::vector<int> parents(int i) const;
    std::vector<int> children(int i) const;
    std::vector<int> undirected_neighbors(int i) const;
    std::vector<int> neighbors(int i) const;

    int edge_count() const;
    int undirected_count() const;
    int directed_count() const;

    /// Topological order of the directed part, ignoring undirected edges.
    std::optional<std::vector<int>> topological_order() const;
    bool has_directed_cycle() const { return !topological_order().has_value(); }
    bool is_dag() const { return undirected_count() == 0 && !has_directed_cycle(); }

    /// Label of node i; defaults to "V<i+1>".
    std::string label(int i) const;
    std::vector<std::string> labels() const;
    bool has_custom_labels() const { return labels_ != nullptr; }
    void set_labels(std::vector<std::string> labels);
    void share_labels(const Pdag& other) { labels_ = other.labels_; }

    bool operator==(const Pdag& other) const { return d_ == other.d_ && adj_ == other.adj_; }

private:
    bool at(int i, int j) const { return adj_[static_cast<std::size_t>(i) * d_ + j] != 0; }
    void put(int i, int j, bool v) { adj_[static_cast<std::size_t>(i) * d_ + j] = v ? 1 : 0; }
    void check_pair(int i, int j) const;

    int d_ = 0;
    std::vector<std::uint8_t> adj_;
    std::shared_ptr<const std::vector<std::string>> labels_;
};

/// A Pdag with no undirected marks and an acyclic directed part.
class Dag {
public:
    Dag() = default;
    /// Throws std::invalid_argument if g is not a DAG.
    explicit Dag(Pdag g);
    static Dag empty(int node_count) { return Dag(Pdag(node_count)); }

    const Pdag& pdag() const { return g_; }
    operator const Pdag&() const { return g_; }

    int node_count() const { return g_.node_count(); }
    bool has_edge(int from, int to) const { return g_.has_directed(from, to); }
    std::vector<int> parents(int i) const { return g_.parents(i); }
    std::vector<int> children(int i) const { return g_.children(i); }
    int edge_count() const { return g_.edge_count(); }
    std::vector<int> topological_order() const { return *g_.topological_order(); }

    bool operator==(const Dag& other) const { return g_ == other.g_; }

private:
    Pdag g_;
};

class Cpdag;
namespace detail {
Cpdag trust_cpdag(Pdag g);
}

/// Completed PDAG: the unique representative of a Markov equivalence class.
class Cpdag {
public:
    Cpdag() = default;
    /// Throws std::invalid_argument unless g is the CPDAG of some DAG.
    explicit Cpdag(Pdag g);
    static Cpdag empty(int node_count);

    const Pdag& pdag() const { return g_; }
    operator const Pdag&() const { return g_; }
    int node_count() const { return g_.node_count(); }

    bool operator==(const Cpdag& other) const { return g_ == other.g_; }

private:
    struct Trusted {};
    Cpdag(Pdag g, Trusted) : g_(std::move(g)) {}
    friend Cpdag detail::trust_cpdag(Pdag g);

    Pdag g_;
};

/// Unshielded collider a -> c <- b with a < b.
struct VStructure {
    int a;
    int c;
    int b;
    auto operator<=>(const VStructure&) const = default;
};

Pdag skeleton(const Pdag& g);

/// All unshielded colliders, sorted.
std::vector<VStructure> v_structures(const Pdag& g);

/// What opposite directions on the same pair combine to.
enum class ConflictRule { Undirected, Absent };

/// Pairwise mark combination. Absent wins; directed beats undirected;
/// opposite directions collapse according to `rule`.
Pdag intersect(const Pdag& g1, const Pdag& g2, ConflictRule rule = ConflictRule::Undirected);

/// True iff every edge of sub_g is covered by super_g: a directed edge by
/// the same direction or an undirected mark, an undirected edge by any mark.
bool includes(const Pdag& super_g, const Pdag& sub_g);

// ---------------------------------------------------------------------------
// Interventions

/// Structural intervention on `node`: the listed incoming edges are cut.
struct StructuralTarget {
    int node = 0;
    std::vector<int> removed_parents;
    bool operator==(const StructuralTarget&) const = default;
};

/// Parametric intervention: parents kept, mechanism shifted and rescaled.
struct ParametricTarget {
    int node = 0;
    double mean_shift = 1.0;
    double noise_std = 2.0;
    bool operator==(const ParametricTarget&) const = default;
};

struct ClientTargets {
    std::vector<StructuralTarget> structural;
    std::vector<ParametricTarget> parametric;

    bool observational() const { return structural.empty() && parametric.empty(); }
    bool operator==(const ClientTargets&) const = default;
};

struct InterventionFamily {
    std::vector<ClientTargets> clients;

    std::size_t size() const { return clients.size(); }
    bool has_observational_client() const;
    bool operator==(const InterventionFamily&) const = default;
};

/// Throws std::invalid_argument if a target references an invalid node or a
/// non-existent incoming edge, or (unless allowed) no client is observational.
void validate_family(const Dag& g, const InterventionFamily& family,
                     bool allow_no_observational = false);

/// Removes exactly the listed incoming edges.
Dag mutilate(const Dag& g, std::span<const StructuralTarget> targets);
inline Dag mutilate(const Dag& g, const ClientTargets& targets) {
    return mutilate(g, std::span<const StructuralTarget>(targets.structural));
}

/// Target that removes every incoming edge of `node`.
StructuralTarget full_structural_target(const Dag& g, int node);

}  // namespace fedcaus
