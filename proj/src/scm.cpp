#include "fedcaus/scm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace fedcaus {

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void validate_sem(const LinearSem& sem) {
    const int d = sem.node_count();
    if (sem.weights.rows() != d || sem.weights.cols() != d) throw std::invalid_argument("weight matrix shape differs from DAG");
    if (sem.noise_std.size() != d) throw std::invalid_argument("noise vector length differs from DAG");
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) {
            const bool edge = j != i && sem.dag.has_edge(j, i);
            if (edge != (sem.weights(j, i) != 0.0)) throw std::invalid_argument("weight support differs from DAG edges");
        }
        if (!(sem.noise_std(j) > 0.0) || !std::isfinite(sem.noise_std(j)))
            throw std::invalid_argument("noise std must be positive");
    }
}

Dag erdos_renyi_dag(int d, double expected_edges, std::uint64_t seed) {
    if (d < 2) throw std::invalid_argument("need at least two nodes");
    if (expected_edges < 0.0) throw std::invalid_argument("expected edge count must be non-negative");
    std::mt19937_64 rng(seed);
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    const double pairs = 0.5 * d * (d - 1);
    const double p = std::clamp(expected_edges / pairs, 0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Pdag g(d);
    for (int x = 0; x < d; ++x)
        for (int y = x + 1; y < d; ++y)
            if (unit(rng) < p) g.add_directed(order[x], order[y]);
    return Dag(std::move(g));
}

LinearSem sample_weights(const Dag& dag, std::uint64_t seed) {
    const int d = dag.node_count();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> magnitude(0.1, 1.0);
    std::bernoulli_distribution negative(0.5);
    LinearSem sem{dag, Eigen::MatrixXd::Zero(d, d), Eigen::VectorXd::Ones(d)};
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i)
            if (i != j && dag.has_edge(j, i)) {
                const double m = magnitude(rng);
                sem.weights(j, i) = negative(rng) ? -m : m;
            }
    return sem;
}

Dataset sample_client(const LinearSem& sem, const ClientScenario& scenario) {
    if (scenario.sample_count < 1) throw std::invalid_argument("sample count must be at least 1");
    const int d = sem.node_count();
    const Dag cut = mutilate(sem.dag, scenario.targets);

    Eigen::MatrixXd w = sem.weights;
    for (const auto& t : scenario.targets.structural)
        for (int p : t.removed_parents) w(p, t.node) = 0.0;
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd scale = sem.noise_std;
    for (const auto& t : scenario.targets.parametric) {
        if (t.node < 0 || t.node >= d) throw std::invalid_argument("intervention target out of range");
        shift(t.node) = t.mean_shift;
        scale(t.node) = t.noise_std;
    }

    const int n = scenario.sample_count;
    std::mt19937_64 rng(scenario.rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Dataset out;
    out.values.resize(n, d);
    out.labels = sem.dag.pdag().labels();
    const auto order = cut.topological_order();
    for (int r = 0; r < n; ++r) {
        for (int i : order) {
            double v = shift(i) + scale(i) * gauss(rng);
            for (int j : cut.parents(i)) v += w(j, i) * out.values(r, j);
            out.values(r, i) = v;
        }
    }
    return out;
}

std::vector<ShieldedCollider> shielded_colliders(const Dag& dag) {
    std::vector<ShieldedCollider> out;
    const int d = dag.node_count();
    for (int c = 0; c < d; ++c) {
        const auto pa = dag.parents(c);
        for (int a : pa)
            for (int b : pa)
                if (a != b && dag.has_edge(a, b)) out.push_back({a, b, c});
    }
    return out;
}

InterventionFamily plan_interventions(const Dag& dag, int clients, double structural_fraction,
                                      std::uint64_t seed, bool prioritize_shielded) {
    if (clients < 2) throw std::invalid_argument("need at least two clients");
    const int d = dag.node_count();
    InterventionFamily family;
    family.clients.resize(clients);
    if (structural_fraction <= 0.0) return family;

    const int budget = std::max(1, static_cast<int>(std::lround(structural_fraction * d)));
    const auto colliders = prioritize_shielded ? shielded_colliders(dag) : std::vector<ShieldedCollider>{};
    std::mt19937_64 rng(seed);
    std::size_t next_collider = 0;

    for (int k = 1; k < clients; ++k) {
        auto& targets = family.clients[k].structural;
        auto targeted = [&targets](int v) {
            return std::any_of(targets.begin(), targets.end(), [v](const StructuralTarget& t) { return t.node == v; });
        };
        // One collider per client per pass so every interventional client
        // gets one before any gets a second.
        for (int slot = 0; slot < budget; ++slot) {
            const std::size_t idx = next_collider + static_cast<std::size_t>(slot) * (clients - 1);
            if (idx >= colliders.size()) break;
            const auto& sc = colliders[idx];
            if (targeted(sc.b)) continue;
            targets.push_back({sc.b, {sc.a}});
        }
        ++next_collider;

        std::vector<int> candidates;
        for (int v = 0; v < d; ++v)
            if (!dag.parents(v).empty() && !targeted(v)) candidates.push_back(v);
        std::shuffle(candidates.begin(), candidates.end(), rng);
        for (int v : candidates) {
            if (static_cast<int>(targets.size()) >= budget) break;
            targets.push_back(full_structural_target(dag, v));
        }
        std::sort(targets.begin(), targets.end(),
                  [](const StructuralTarget& x, const StructuralTarget& y) { return x.node < y.node; });
    }
    return family;
}

InterventionFamily Scenario::family() const {
    InterventionFamily f;
    for (const auto& c : clients) f.clients.push_back(c.targets);
    return f;
}

}  // namespace fedcaus
