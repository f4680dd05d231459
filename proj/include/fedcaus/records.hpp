#pragma once

#include <cstdint>
#include <string>

namespace fedcaus {

/// One candidate evaluation on the server.
struct MoveRecord {
    std::uint64_t round = 0;
    std::string phase;
    std::string op;
    double worst_regret = 0.0;
    bool accepted = false;

    bool operator==(const MoveRecord&) const = default;
};

/// One (cell, seed) run of the experiment harness.
struct RunRecord {
    std::string axis;
    int d = 0;
    int k = 0;
    int n = 0;  // 0 means heterogeneous per-client sample sizes
    std::string method;
    double dp_epsilon = 0.0;  // 0 means no noise
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;

    int shd_cpdag = 0;
    double f1_cpdag = 0.0;
    int shd_phi = 0;
    double f1_phi = 0.0;
    std::uint64_t rounds = 0;
    std::uint64_t queries = 0;
    double wall_ms = 0.0;

    bool operator==(const RunRecord&) const = default;
};

}  // namespace fedcaus
