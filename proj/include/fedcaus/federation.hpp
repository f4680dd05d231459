#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedcaus/graph.hpp"
#include "fedcaus/records.hpp"
#include "fedcaus/scoring.hpp"

namespace fedcaus {

enum class Phase { Aggregation, Refinement };
const char* phase_name(Phase p);

/// Server -> client. The candidate travels in the edge-list text format.
struct RegretQuery {
    std::uint64_t round = 0;
    Phase phase = Phase::Aggregation;
    std::string graph;
};

/// Client -> server. The only inbound message type.
struct RegretReport {
    int client_id = 0;
    std::uint64_t round = 0;
    double regret = 0.0;
    bool noised = false;
};

struct DpConfig {
    double epsilon = 1.0;
    double sensitivity = 1.0;
    std::uint64_t rng_seed = 0;

    double scale() const { return sensitivity / epsilon; }
    void validate() const;
};

/// Laplace(0, scale) by inverse CDF; u must lie in (0, 1).
double laplace_from_uniform(double scale, double u);
double laplace_noise(double scale, std::mt19937_64& rng);

class RegretEndpoint {
public:
    virtual ~RegretEndpoint() = default;
    virtual RegretReport answer(const RegretQuery& query) = 0;
};

/// One client. Its data, local CPDAG and baseline never leave this object;
/// answer() hands back a single scalar.
///
/// The effective graph drops pairs where the candidate and the local graph
/// disagree on direction. Collapsing them to undirected instead would let a
/// wrongly oriented candidate edge borrow the client's own orientation
/// during scoring and go unpenalised.
class ClientState : public RegretEndpoint {
public:
    ClientState(int client_id, std::shared_ptr<const BicScorer> scorer, Cpdag local_cpdag,
                std::optional<DpConfig> dp = std::nullopt, ConflictRule conflicts = ConflictRule::Absent);

    RegretReport answer(const RegretQuery& query) override;

    int client_id() const { return id_; }
    /// Client-side diagnostics; not part of the protocol.
    Pdag effective_graph(Phase phase, const Pdag& h) const;
    double noiseless_regret(Phase phase, const Pdag& h) const;
    std::vector<double> node_regrets(Phase phase, const Pdag& h) const;
    const Cpdag& local_cpdag() const { return local_; }
    double baseline() const { return baseline_; }

private:
    int id_;
    std::shared_ptr<const BicScorer> scorer_;
    Cpdag local_;
    double baseline_;
    std::optional<DpConfig> dp_;
    ConflictRule conflicts_;
    std::mt19937_64 rng_;
    std::optional<std::uint64_t> last_round_;
};

class FederationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FederationConfig {
    /// Minimum decrease of the worst regret for a move to be accepted.
    /// Candidates within this distance of the best one count as tied and
    /// the first in enumeration order wins.
    double tolerance = 1e-6;
    int max_parents = -1;
    int iteration_cap = -1;  // per phase; -1: 10 d^2
    /// Refinement also tries orienting two edges into a common node at once.
    bool collider_moves = true;
    /// Refinement also tries every union of two of the moves above.
    bool compound_moves = true;
    /// Backward stage of aggregation also takes deletes that leave the
    /// worst regret within tolerance of the incumbent.
    bool backward_parsimony = true;
    /// After the backward stage, add v-structures that no client objects to.
    bool vstructure_completion = true;
    /// Break ties in the worst regret by the summed regret, and accept a
    /// move that keeps the worst regret but lowers the sum.
    bool total_tiebreak = true;
    /// Fan each round out to clients on separate threads.
    bool parallel = false;
};

struct IperiResult {
    Cpdag cpdag;
    Pdag phi;
    std::vector<MoveRecord> log;
    std::uint64_t rounds = 0;
    std::uint64_t queries = 0;
    double worst_after_aggregation = 0.0;
    double worst_final = 0.0;
};

/// Server side of the protocol. Holds nothing but the endpoints, the
/// current graph and the move log.
class Coordinator {
public:
    Coordinator(std::vector<RegretEndpoint*> clients, int node_count, FederationConfig cfg = {});

    /// One round: queries every client, returns the maximum regret.
    double worst_regret(Phase phase, const Pdag& h, const std::string& op);

    Cpdag aggregate();
    Pdag refine(const Cpdag& g_hat);
    IperiResult run();

    const std::vector<MoveRecord>& log() const { return log_; }
    std::uint64_t rounds() const { return rounds_; }
    std::uint64_t queries() const { return queries_; }
    double incumbent() const { return incumbent_; }

private:
    struct Candidate {
        Pdag graph;
        std::string op;
    };
    // Evaluates candidates, returns the index of the chosen one (or -1) and
    // marks it accepted in the log when it beats the incumbent.
    int choose(Phase phase, const std::vector<Candidate>& cands, bool allow_equal);

    std::vector<RegretEndpoint*> clients_;
    int d_;
    FederationConfig cfg_;
    std::vector<MoveRecord> log_;
    std::uint64_t rounds_ = 0;
    std::uint64_t queries_ = 0;
    double incumbent_ = 0.0;
    double incumbent_total_ = 0.0;
    double last_total_ = 0.0;
};

Cpdag phase1_aggregate(std::span<RegretEndpoint* const> clients, int node_count, const FederationConfig& cfg = {});
Pdag phase2_refine(const Cpdag& g_hat, std::span<RegretEndpoint* const> clients, const FederationConfig& cfg = {});
IperiResult run_iperi(std::span<RegretEndpoint* const> clients, int node_count, const FederationConfig& cfg = {});

}  // namespace fedcaus
