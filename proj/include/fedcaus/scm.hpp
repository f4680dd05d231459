#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fedcaus/graph.hpp"

namespace fedcaus {

/// Linear-Gaussian structural equation model X_i = sum_j w_ji X_j + N_i.
/// weights(j, i) holds w_ji and is non-zero exactly on the edges of dag.
struct LinearSem {
    Dag dag;
    Eigen::MatrixXd weights;
    Eigen::VectorXd noise_std;

    int node_count() const { return dag.node_count(); }
};

/// Throws std::invalid_argument if the weight support differs from the DAG
/// or a noise standard deviation is not strictly positive.
void validate_sem(const LinearSem& sem);

struct ClientScenario {
    int client_id = 0;
    int sample_count = 0;
    ClientTargets targets;
    std::uint64_t rng_seed = 0;

    bool operator==(const ClientScenario&) const = default;
};

/// n x d sample matrix, columns in node order.
struct Dataset {
    Eigen::MatrixXd values;
    std::vector<std::string> labels;

    int rows() const { return static_cast<int>(values.rows()); }
    int cols() const { return static_cast<int>(values.cols()); }
};

/// Independent stream seed for `stream` under `root` (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

/// G(n, p) over a random topological order with
/// p = expected_edges / (d(d-1)/2), clamped to [0, 1].
Dag erdos_renyi_dag(int d, double expected_edges, std::uint64_t seed);

/// Edge weights uniform on [-1, -0.1] U [0.1, 1], unit noise.
LinearSem sample_weights(const Dag& dag, std::uint64_t seed);

/// Draws scenario.sample_count rows from the client's intervened mechanism.
Dataset sample_client(const LinearSem& sem, const ClientScenario& scenario);

/// Shielded collider a -> c <- b with a -> b also present.
struct ShieldedCollider {
    int a;
    int b;
    int c;
    bool operator==(const ShieldedCollider&) const = default;
};

std::vector<ShieldedCollider> shielded_colliders(const Dag& dag);

/// Client 0 is observational. Every other client receives
/// max(1, round(structural_fraction * d)) structural targets (none when the
/// fraction is 0). With prioritize_shielded, shielded colliders are handed
/// out first, each as "cut a -> b", which turns the collider into a
/// v-structure on that client; remaining slots cut all incoming edges of a
/// random node.
InterventionFamily plan_interventions(const Dag& dag, int clients, double structural_fraction,
                                      std::uint64_t seed, bool prioritize_shielded);

/// Ground truth plus per-client sampling plans.
struct Scenario {
    LinearSem sem;
    std::vector<ClientScenario> clients;

    InterventionFamily family() const;
};

}  // namespace fedcaus
