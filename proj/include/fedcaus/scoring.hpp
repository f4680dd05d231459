#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "fedcaus/graph.hpp"
#include "fedcaus/scm.hpp"

namespace fedcaus {

struct BicConfig {
    double penalty = 1.0;
    double ridge = 1e-10;
    double variance_floor = 1e-12;
};

/// Thrown when the parent design stays singular after the ridge fallback.
class CollinearParents : public std::runtime_error {
public:
    CollinearParents() : std::runtime_error("collinear parents") {}
};

/// FNV-1a over the shape and raw bytes of the sample matrix.
std::uint64_t dataset_fingerprint(const Dataset& data);

/// Local scores keyed by (node, parent bitmask), bound to one dataset.
/// Lookups take a shared lock; inserting an existing key is a no-op.
class LocalScoreCache {
public:
    explicit LocalScoreCache(std::uint64_t fingerprint) : fingerprint_(fingerprint) {}

    std::uint64_t fingerprint() const { return fingerprint_; }
    /// nullopt on a miss or when `fingerprint` is not the bound dataset.
    std::optional<double> lookup(std::uint64_t fingerprint, int node, std::uint64_t parents) const;
    void insert(std::uint64_t fingerprint, int node, std::uint64_t parents, double value);

    std::uint64_t hits() const { return hits_.load(); }
    std::uint64_t misses() const { return misses_.load(); }
    std::size_t size() const;

private:
    struct Key {
        int node;
        std::uint64_t parents;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return std::hash<std::uint64_t>()(k.parents * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(k.node));
        }
    };

    std::uint64_t fingerprint_;
    mutable std::shared_mutex mu_;
    std::unordered_map<Key, double, KeyHash> table_;
    mutable std::atomic<std::uint64_t> hits_{0};
    mutable std::atomic<std::uint64_t> misses_{0};
};

/// Gaussian BIC of `node` regressed on `parents` with intercept:
/// -(n/2) ln(s2) - (penalty/2)(|parents| + 2) ln(n), s2 the mean squared residual.
double local_bic(const Dataset& data, int node, std::span<const int> parents, const BicConfig& cfg = {});

/// Decomposable BIC over one dataset with a cached sufficient statistic
/// (the centered covariance) and a shared local-score cache.
class BicScorer {
public:
    explicit BicScorer(const Dataset& data, BicConfig cfg = {});
    /// Shares an existing cache; throws std::invalid_argument on a fingerprint mismatch.
    BicScorer(const Dataset& data, std::shared_ptr<LocalScoreCache> cache, BicConfig cfg = {});
    /// Scores from a known covariance as if it came from n samples.
    BicScorer(Eigen::MatrixXd covariance, int sample_count, BicConfig cfg = {});

    int node_count() const { return static_cast<int>(cov_.rows()); }
    int sample_count() const { return n_; }
    const BicConfig& config() const { return cfg_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }

    double local(int node, std::span<const int> parents) const;
    double local_uncached(int node, std::span<const int> parents) const;

    LocalScoreCache& cache() const { return *cache_; }
    std::shared_ptr<LocalScoreCache> shared_cache() const { return cache_; }

private:
    Eigen::MatrixXd cov_;
    int n_ = 0;
    BicConfig cfg_;
    std::uint64_t fingerprint_ = 0;
    std::shared_ptr<LocalScoreCache> cache_;
};

double score_dag(const BicScorer& scorer, const Dag& g);
double score_dag(const Dataset& data, const Dag& g, const BicConfig& cfg = {});

/// The DAG a PDAG is scored through: a consistent extension of its Meek
/// closure, or if none exists, the PDAG with its undirected pairs oriented
/// low -> high (high -> low where that would close a cycle).
Dag scoring_extension(const Pdag& g);
double score_pdag(const BicScorer& scorer, const Pdag& g);

/// baseline - score_pdag(h_effective).
double regret(const BicScorer& scorer, const Pdag& h_effective, double baseline);

/// Per-node split of a regret: |l_i(N_i(local)) - l_i(N_i(h))| where N_i is
/// the set of directed parents and undirected neighbours of i.
std::vector<double> node_regrets(const BicScorer& scorer, const Pdag& local, const Pdag& h_effective);

/// Covariance implied by a linear SEM under the client's interventions.
Eigen::MatrixXd implied_covariance(const LinearSem& sem, const ClientTargets& targets);

}  // namespace fedcaus
