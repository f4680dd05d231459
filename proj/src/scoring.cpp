#include "fedcaus/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>

#include "fedcaus/pdag.hpp"

namespace fedcaus {

namespace {

std::vector<double> column_means(const Dataset& data) {
    std::vector<double> mean(data.cols(), 0.0);
    for (int c = 0; c < data.cols(); ++c) {
        double s = 0.0;
        for (int r = 0; r < data.rows(); ++r) s += data.values(r, c);
        mean[c] = s / data.rows();
    }
    return mean;
}

// Plain sequential loop so every caller gets the same rounding regardless
// of how Eigen would vectorize a particular operand.
double centered_cov(const Dataset& data, const std::vector<double>& mean, int a, int b) {
    double s = 0.0;
    for (int r = 0; r < data.rows(); ++r) s += (data.values(r, a) - mean[a]) * (data.values(r, b) - mean[b]);
    return s / data.rows();
}

double bic_from_cov(const Eigen::MatrixXd& sub, int n, const BicConfig& cfg) {
    // sub: (p+1) x (p+1), node first, then parents.
    const int p = static_cast<int>(sub.rows()) - 1;
    double s2 = sub(0, 0);
    if (p > 0) {
        Eigen::MatrixXd spp = sub.bottomRightCorner(p, p);
        Eigen::VectorXd spy = sub.col(0).tail(p);
        Eigen::LLT<Eigen::MatrixXd> llt(spp);
        if (llt.info() != Eigen::Success) {
            spp.diagonal().array() += cfg.ridge;
            llt.compute(spp);
            if (llt.info() != Eigen::Success) throw CollinearParents();
        }
        const Eigen::VectorXd beta = llt.solve(spy);
        s2 = sub(0, 0) - spy.dot(beta);
        if (!std::isfinite(s2)) throw CollinearParents();
    }
    s2 = std::max(s2, cfg.variance_floor);
    return -0.5 * n * std::log(s2) - 0.5 * cfg.penalty * (p + 2) * std::log(static_cast<double>(n));
}

void check_parents(int d, int n, int node, std::span<const int> parents) {
    if (node < 0 || node >= d) throw std::out_of_range("node index out of range");
    for (int q : parents) {
        if (q < 0 || q >= d) throw std::out_of_range("parent index out of range");
        if (q == node) throw std::invalid_argument("node listed as its own parent");
    }
    if (n <= static_cast<int>(parents.size()) + 1) throw std::invalid_argument("too few samples for parent set");
}

std::uint64_t parent_mask(std::span<const int> parents) {
    std::uint64_t m = 0;
    for (int q : parents) m |= std::uint64_t{1} << q;
    return m;
}

}  // namespace

std::uint64_t dataset_fingerprint(const Dataset& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* p, std::size_t len) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    const std::int64_t shape[2] = {data.rows(), data.cols()};
    mix(shape, sizeof shape);
    mix(data.values.data(), sizeof(double) * static_cast<std::size_t>(data.values.size()));
    return h;
}

std::optional<double> LocalScoreCache::lookup(std::uint64_t fingerprint, int node, std::uint64_t parents) const {
    if (fingerprint != fingerprint_) return std::nullopt;
    std::shared_lock lock(mu_);
    auto it = table_.find({node, parents});
    if (it == table_.end()) {
        ++misses_;
        return std::nullopt;
    }
    ++hits_;
    return it->second;
}

void LocalScoreCache::insert(std::uint64_t fingerprint, int node, std::uint64_t parents, double value) {
    if (fingerprint != fingerprint_) throw std::invalid_argument("cache fingerprint mismatch");
    std::unique_lock lock(mu_);
    table_.try_emplace({node, parents}, value);
}

std::size_t LocalScoreCache::size() const {
    std::shared_lock lock(mu_);
    return table_.size();
}

double local_bic(const Dataset& data, int node, std::span<const int> parents, const BicConfig& cfg) {
    check_parents(data.cols(), data.rows(), node, parents);
    const auto mean = column_means(data);
    std::vector<int> idx{node};
    idx.insert(idx.end(), parents.begin(), parents.end());
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd sub(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) sub(a, b) = sub(b, a) = centered_cov(data, mean, std::min(idx[a], idx[b]), std::max(idx[a], idx[b]));
    return bic_from_cov(sub, data.rows(), cfg);
}

BicScorer::BicScorer(const Dataset& data, BicConfig cfg)
    : BicScorer(data, std::make_shared<LocalScoreCache>(dataset_fingerprint(data)), cfg) {}

BicScorer::BicScorer(const Dataset& data, std::shared_ptr<LocalScoreCache> cache, BicConfig cfg)
    : n_(data.rows()), cfg_(cfg), fingerprint_(dataset_fingerprint(data)), cache_(std::move(cache)) {
    if (!cache_ || cache_->fingerprint() != fingerprint_) throw std::invalid_argument("cache fingerprint mismatch");
    if (data.cols() > 64) throw std::invalid_argument("at most 64 variables are supported");
    const int d = data.cols();
    const auto mean = column_means(data);
    cov_.resize(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) cov_(a, b) = cov_(b, a) = centered_cov(data, mean, a, b);
}

BicScorer::BicScorer(Eigen::MatrixXd covariance, int sample_count, BicConfig cfg)
    : cov_(std::move(covariance)), n_(sample_count), cfg_(cfg) {
    if (cov_.rows() != cov_.cols()) throw std::invalid_argument("covariance must be square");
    if (cov_.rows() > 64) throw std::invalid_argument("at most 64 variables are supported");
    std::uint64_t h = 0xcbf29ce484222325ULL ^ static_cast<std::uint64_t>(sample_count);
    const auto* b = reinterpret_cast<const unsigned char*>(cov_.data());
    for (std::size_t i = 0; i < sizeof(double) * static_cast<std::size_t>(cov_.size()); ++i) {
        h ^= b[i];
        h *= 0x100000001b3ULL;
    }
    fingerprint_ = h;
    cache_ = std::make_shared<LocalScoreCache>(fingerprint_);
}

double BicScorer::local_uncached(int node, std::span<const int> parents) const {
    check_parents(node_count(), n_, node, parents);
    const int m = static_cast<int>(parents.size()) + 1;
    Eigen::MatrixXd sub(m, m);
    auto at = [&](int k) { return k == 0 ? node : parents[k - 1]; };
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) sub(a, b) = cov_(at(a), at(b));
    return bic_from_cov(sub, n_, cfg_);
}

double BicScorer::local(int node, std::span<const int> parents) const {
    const std::uint64_t mask = parent_mask(parents);
    if (auto hit = cache_->lookup(fingerprint_, node, mask)) return *hit;
    // Parent order does not change the fitted variance, but it can change
    // rounding, so misses are computed on the sorted set.
    std::vector<int> sorted(parents.begin(), parents.end());
    std::sort(sorted.begin(), sorted.end());
    const double v = local_uncached(node, sorted);
    cache_->insert(fingerprint_, node, mask, v);
    return v;
}

double score_dag(const BicScorer& scorer, const Dag& g) {
    if (g.node_count() != scorer.node_count()) throw std::invalid_argument("node count differs");
    double total = 0.0;
    for (int i = 0; i < g.node_count(); ++i) total += scorer.local(i, g.parents(i));
    return total;
}

double score_dag(const Dataset& data, const Dag& g, const BicConfig& cfg) {
    if (g.node_count() != data.cols()) throw std::invalid_argument("node count differs");
    double total = 0.0;
    for (int i = 0; i < g.node_count(); ++i) total += local_bic(data, i, g.parents(i), cfg);
    return total;
}

Dag scoring_extension(const Pdag& g) {
    if (g.has_directed_cycle()) throw InconsistentPdag("inconsistent PDAG");
    Pdag base = g;
    try {
        base = complete_pdag(g);
        if (auto ext = consistent_extension(base)) return *ext;
    } catch (const InconsistentPdag&) {
        base = g;
    }
    const int d = base.node_count();
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            if (!base.has_undirected(i, j)) continue;
            base.add_directed(i, j);
            if (base.has_directed_cycle()) base.add_directed(j, i);
        }
    }
    return Dag(std::move(base));
}

double score_pdag(const BicScorer& scorer, const Pdag& g) { return score_dag(scorer, scoring_extension(g)); }

double regret(const BicScorer& scorer, const Pdag& h_effective, double baseline) {
    return baseline - score_pdag(scorer, h_effective);
}

std::vector<double> node_regrets(const BicScorer& scorer, const Pdag& local, const Pdag& h_effective) {
    if (local.node_count() != h_effective.node_count()) throw std::invalid_argument("node count differs");
    std::vector<double> out(local.node_count());
    for (int i = 0; i < local.node_count(); ++i) {
        auto both = [i](const Pdag& g) {
            auto s = g.parents(i);
            auto u = g.undirected_neighbors(i);
            s.insert(s.end(), u.begin(), u.end());
            std::sort(s.begin(), s.end());
            return s;
        };
        out[i] = std::abs(scorer.local(i, both(local)) - scorer.local(i, both(h_effective)));
    }
    return out;
}

Eigen::MatrixXd implied_covariance(const LinearSem& sem, const ClientTargets& targets) {
    const int d = sem.node_count();
    Eigen::MatrixXd w = sem.weights;
    for (const auto& t : targets.structural)
        for (int p : t.removed_parents) w(p, t.node) = 0.0;
    Eigen::VectorXd scale = sem.noise_std;
    for (const auto& t : targets.parametric) scale(t.node) = t.noise_std;
    // X = B X + N with B = W^T, so X = (I - B)^{-1} N.
    const Eigen::MatrixXd a = (Eigen::MatrixXd::Identity(d, d) - w.transpose()).inverse();
    return a * scale.array().square().matrix().asDiagonal() * a.transpose();
}

}  // namespace fedcaus
