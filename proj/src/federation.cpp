#include "fedcaus/federation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "fedcaus/ges.hpp"
#include "fedcaus/io.hpp"
#include "fedcaus/pdag.hpp"

namespace fedcaus {

const char* phase_name(Phase p) { return p == Phase::Aggregation ? "aggregation" : "refinement"; }

void DpConfig::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("dp epsilon must be positive");
    if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) throw std::invalid_argument("dp sensitivity must be positive");
    if (!(scale() > 0.0)) throw std::invalid_argument("dp scale must be positive");
}

double laplace_from_uniform(double scale, double u) {
    if (!(scale > 0.0)) throw std::invalid_argument("laplace scale must be positive");
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("uniform draw must lie in (0, 1)");
    const double c = u - 0.5;
    if (c == 0.0) return 0.0;
    return -scale * std::copysign(1.0, c) * std::log1p(-2.0 * std::abs(c));
}

double laplace_noise(double scale, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = 0.0;
    while (u == 0.0) u = unit(rng);
    return laplace_from_uniform(scale, u);
}

// ---------------------------------------------------------------------------

ClientState::ClientState(int client_id, std::shared_ptr<const BicScorer> scorer, Cpdag local_cpdag,
                         std::optional<DpConfig> dp, ConflictRule conflicts)
    : id_(client_id), scorer_(std::move(scorer)), local_(std::move(local_cpdag)), dp_(dp), conflicts_(conflicts) {
    if (!scorer_) throw std::invalid_argument("client needs a scorer");
    if (local_.node_count() != scorer_->node_count()) throw std::invalid_argument("node count differs");
    baseline_ = score_pdag(*scorer_, local_);
    if (!std::isfinite(baseline_)) throw std::invalid_argument("baseline score is not finite");
    if (dp_) {
        dp_->validate();
        rng_.seed(dp_->rng_seed);
    }
}

Pdag ClientState::effective_graph(Phase phase, const Pdag& h) const {
    return phase == Phase::Aggregation ? intersect(h, local_, conflicts_)
                                      : intersect(h, skeleton(local_), conflicts_);
}

double ClientState::noiseless_regret(Phase phase, const Pdag& h) const {
    const Pdag eff = effective_graph(phase, h);
    // A graph this client cannot realise at all is infeasible, not scored
    // through an arbitrary orientation that may happen to fit.
    try {
        if (!consistent_extension(complete_pdag(eff))) return std::numeric_limits<double>::infinity();
    } catch (const InconsistentPdag&) {
        return std::numeric_limits<double>::infinity();
    }
    return regret(*scorer_, eff, baseline_);
}

std::vector<double> ClientState::node_regrets(Phase phase, const Pdag& h) const {
    return fedcaus::node_regrets(*scorer_, local_, effective_graph(phase, h));
}

RegretReport ClientState::answer(const RegretQuery& query) {
    if (last_round_ && query.round <= *last_round_) throw FederationError("round already answered");
    const Pdag h = parse_graph(query.graph);
    if (h.node_count() != local_.node_count()) throw std::invalid_argument("node count differs");
    double r = noiseless_regret(query.phase, h);
    if (dp_) r += laplace_noise(dp_->scale(), rng_);
    if (std::isnan(r)) throw FederationError("regret is not a number");
    last_round_ = query.round;
    return {id_, query.round, r, dp_.has_value()};
}

// ---------------------------------------------------------------------------

Coordinator::Coordinator(std::vector<RegretEndpoint*> clients, int node_count, FederationConfig cfg)
    : clients_(std::move(clients)), d_(node_count), cfg_(cfg) {
    if (clients_.empty()) throw std::invalid_argument("need at least one client");
    if (node_count < 1) throw std::invalid_argument("need at least one node");
    if (!(cfg_.tolerance >= 0.0)) throw std::invalid_argument("tolerance must be non-negative");
}

double Coordinator::worst_regret(Phase phase, const Pdag& h, const std::string& op) {
    const RegretQuery q{++rounds_, phase, format_graph(h)};
    std::vector<RegretReport> reports(clients_.size());
    auto ask = [&](std::size_t k) {
        try {
            return clients_[k]->answer(q);
        } catch (const std::exception& e) {
            throw FederationError("client " + std::to_string(k) + " failed in round " + std::to_string(q.round) +
                                  ": " + e.what());
        }
    };
    if (cfg_.parallel && clients_.size() > 1) {
        std::vector<std::future<RegretReport>> pending;
        for (std::size_t k = 0; k < clients_.size(); ++k) pending.push_back(std::async(std::launch::async, ask, k));
        for (std::size_t k = 0; k < clients_.size(); ++k) reports[k] = pending[k].get();
    } else {
        for (std::size_t k = 0; k < clients_.size(); ++k) reports[k] = ask(k);
    }
    queries_ += clients_.size();
    double worst = -std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (const auto& r : reports) {
        if (r.round != q.round) throw FederationError("report for the wrong round");
        worst = std::max(worst, r.regret);
        total += r.regret;
    }
    last_total_ = total;
    log_.push_back({q.round, phase_name(phase), op, worst, false});
    return worst;
}

int Coordinator::choose(Phase phase, const std::vector<Candidate>& cands, bool allow_equal) {
    if (cands.empty()) return -1;
    const double tol = cfg_.tolerance;
    const double total_tol = tol * static_cast<double>(clients_.size());
    std::vector<double> w(cands.size()), s(cands.size());
    std::vector<std::size_t> entry(cands.size());
    for (std::size_t c = 0; c < cands.size(); ++c) {
        w[c] = worst_regret(phase, cands[c].graph, cands[c].op);
        s[c] = last_total_;
        entry[c] = log_.size() - 1;
    }
    // A move must lower the worst regret, or keep it and lower the summed
    // regret. The second clause gets the search off plateaus where the worst
    // client is stuck on something no single move fixes.
    auto eligible = [&](std::size_t c) {
        if (!std::isfinite(w[c])) return false;
        if (w[c] < incumbent_ - tol) return true;
        if (w[c] > incumbent_ + tol) return false;
        if (allow_equal) return true;
        return cfg_.total_tiebreak && s[c] < incumbent_total_ - total_tol;
    };
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cands.size(); ++c)
        if (eligible(c)) best = std::min(best, w[c]);
    if (!std::isfinite(best)) return -1;
    double best_total = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cands.size(); ++c)
        if (eligible(c) && w[c] <= best + tol) best_total = std::min(best_total, s[c]);
    // Remaining ties. Aggregation regrets cannot see an orientation the
    // client already has, so the most oriented candidate wins there;
    // refinement regrets cannot see an orientation that stays in the
    // client's class, so the least oriented one wins. Then enumeration order.
    auto rank = [phase](const Pdag& g) {
        const int dir = g.directed_count();
        if (phase == Phase::Refinement) return std::pair{0, -dir};
        return std::pair{static_cast<int>(v_structures(g).size()), dir};
    };
    std::size_t pick = cands.size();
    for (std::size_t c = 0; c < cands.size(); ++c) {
        if (!eligible(c) || w[c] > best + tol) continue;
        if (cfg_.total_tiebreak && s[c] > best_total + total_tol) continue;
        if (pick == cands.size() || rank(cands[c].graph) > rank(cands[pick].graph)) pick = c;
    }
    log_[entry[pick]].accepted = true;
    incumbent_ = w[pick];
    incumbent_total_ = s[pick];
    return static_cast<int>(pick);
}

Cpdag Coordinator::aggregate() {
    Cpdag g = Cpdag::empty(d_);
    incumbent_ = worst_regret(Phase::Aggregation, g, "start");
    incumbent_total_ = last_total_;
    const int cap = cfg_.iteration_cap < 0 ? 10 * d_ * d_ : cfg_.iteration_cap;
    const int max_parents = cfg_.max_parents < 0 ? d_ - 1 : cfg_.max_parents;

    auto unique_push = [](std::vector<Candidate>& out, std::vector<Cpdag>& graphs, Cpdag next, std::string op) {
        if (std::find(graphs.begin(), graphs.end(), next) != graphs.end()) return;
        graphs.push_back(next);
        out.push_back({next.pdag(), std::move(op)});
    };

    int steps = 0;
    while (steps < cap) {
        std::vector<Candidate> cands;
        std::vector<Cpdag> graphs;
        for (const auto& op : enumerate_inserts(g, max_parents)) unique_push(cands, graphs, apply_insert(g, op), describe(op));
        const int pick = choose(Phase::Aggregation, cands, false);
        if (pick < 0) break;
        g = graphs[pick];
        ++steps;
    }
    steps = 0;
    while (steps < cap) {
        std::vector<Candidate> cands;
        std::vector<Cpdag> graphs;
        for (const auto& op : enumerate_deletes(g)) unique_push(cands, graphs, apply_delete(g, op), describe(op));
        const int pick = choose(Phase::Aggregation, cands, cfg_.backward_parsimony);
        if (pick < 0) break;
        g = graphs[pick];
        ++steps;
    }
    if (!cfg_.vstructure_completion) return g;
    // Aggregation regrets are blind to a v-structure the clients already
    // orient, so add such colliders while no client objects.
    steps = 0;
    while (steps < cap) {
        std::vector<Candidate> cands;
        std::vector<Cpdag> graphs;
        const auto have = v_structures(g);
        for (int c = 0; c < d_; ++c) {
            const auto nb = g.pdag().neighbors(c);
            for (std::size_t i = 0; i < nb.size(); ++i) {
                for (std::size_t j = i + 1; j < nb.size(); ++j) {
                    const int a = nb[i], b = nb[j];
                    if (g.pdag().adjacent(a, b)) continue;
                    if (std::binary_search(have.begin(), have.end(), VStructure{a, c, b})) continue;
                    if (g.pdag().has_directed(c, a) || g.pdag().has_directed(c, b)) continue;
                    Pdag trial = g.pdag();
                    trial.add_directed(a, c);
                    trial.add_directed(b, c);
                    std::optional<Dag> ext;
                    try {
                        ext = consistent_extension(complete_pdag(trial));
                    } catch (const InconsistentPdag&) {
                    }
                    if (!ext) continue;
                    Cpdag next = cpdag_of(*ext);
                    if (v_structures(next).size() <= have.size()) continue;
                    unique_push(cands, graphs, std::move(next),
                                "collider " + std::to_string(a) + "->" + std::to_string(c) + "<-" + std::to_string(b));
                }
            }
        }
        const int pick = choose(Phase::Aggregation, cands, true);
        if (pick < 0) break;
        g = graphs[pick];
        ++steps;
    }
    return g;
}

Pdag Coordinator::refine(const Cpdag& g_hat) {
    if (g_hat.node_count() != d_) throw std::invalid_argument("node count differs");
    Pdag g = g_hat.pdag();
    incumbent_ = worst_regret(Phase::Refinement, g, "start");
    incumbent_total_ = last_total_;
    const int cap = cfg_.iteration_cap < 0 ? 10 * d_ * d_ : cfg_.iteration_cap;

    using Arcs = std::vector<std::pair<int, int>>;
    auto name = [](const Arcs& arcs) {
        std::string out = "orient";
        for (auto [from, to] : arcs) out += " " + std::to_string(from) + "->" + std::to_string(to);
        return out;
    };

    int steps = 0;
    while (steps < cap) {
        std::vector<Candidate> cands;
        auto add = [&](const Arcs& arcs) {
            Pdag trial = g;
            for (auto [from, to] : arcs) trial.add_directed(from, to);
            try {
                Pdag next = complete_pdag(trial);
                if (next == g) return;
                for (const auto& c : cands)
                    if (c.graph == next) return;
                cands.push_back({std::move(next), name(arcs)});
            } catch (const InconsistentPdag&) {
                log_.push_back({rounds_, phase_name(Phase::Refinement), name(arcs) + " (inconsistent, skipped)",
                                std::numeric_limits<double>::quiet_NaN(), false});
            }
        };

        std::vector<Arcs> moves;
        for (int a = 0; a < d_; ++a)
            for (int b = a + 1; b < d_; ++b)
                if (g.has_undirected(a, b)) {
                    moves.push_back({{a, b}});
                    moves.push_back({{b, a}});
                }
        if (cfg_.collider_moves) {
            for (int c = 0; c < d_; ++c) {
                const auto nb = g.neighbors(c);
                for (std::size_t i = 0; i < nb.size(); ++i) {
                    for (std::size_t j = i + 1; j < nb.size(); ++j) {
                        const int a = nb[i], b = nb[j];
                        const bool ua = g.has_undirected(a, c), ub = g.has_undirected(b, c);
                        if (!(ua || g.has_directed(a, c)) || !(ub || g.has_directed(b, c)) || !(ua && ub)) continue;
                        moves.push_back({{a, c}, {b, c}});
                    }
                }
            }
        }
        for (const auto& m : moves) add(m);
        if (cfg_.compound_moves) {
            for (std::size_t i = 0; i < moves.size(); ++i) {
                for (std::size_t j = i + 1; j < moves.size(); ++j) {
                    Arcs both = moves[i];
                    bool clash = false;
                    for (auto arc : moves[j]) {
                        if (std::find(both.begin(), both.end(), std::pair{arc.second, arc.first}) != both.end()) clash = true;
                        if (std::find(both.begin(), both.end(), arc) == both.end()) both.push_back(arc);
                    }
                    if (!clash) add(both);
                }
            }
        }
        const int pick = choose(Phase::Refinement, cands, false);
        if (pick < 0) break;
        g = cands[pick].graph;
        ++steps;
    }
    return g;
}

IperiResult Coordinator::run() {
    IperiResult out;
    out.cpdag = aggregate();
    out.worst_after_aggregation = incumbent_;
    out.phi = refine(out.cpdag);
    out.worst_final = incumbent_;
    out.log = log_;
    out.rounds = rounds_;
    out.queries = queries_;
    return out;
}

Cpdag phase1_aggregate(std::span<RegretEndpoint* const> clients, int node_count, const FederationConfig& cfg) {
    Coordinator c({clients.begin(), clients.end()}, node_count, cfg);
    return c.aggregate();
}

Pdag phase2_refine(const Cpdag& g_hat, std::span<RegretEndpoint* const> clients, const FederationConfig& cfg) {
    Coordinator c({clients.begin(), clients.end()}, g_hat.node_count(), cfg);
    return c.refine(g_hat);
}

IperiResult run_iperi(std::span<RegretEndpoint* const> clients, int node_count, const FederationConfig& cfg) {
    Coordinator c({clients.begin(), clients.end()}, node_count, cfg);
    return c.run();
}

}  // namespace fedcaus
