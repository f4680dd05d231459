#pragma once

#include <string>
#include <vector>

#include "fedcaus/graph.hpp"
#include "fedcaus/scoring.hpp"

namespace fedcaus {

struct GesConfig {
    int max_parents = -1;  // -1: d - 1
    double forward_tolerance = 0.0;
    double backward_tolerance = 0.0;
    int iteration_cap = -1;  // -1: 10 d^2
};

/// Insert(x, y, t): add x -> y and orient t - y as t -> y.
struct InsertOp {
    int x;
    int y;
    std::vector<int> t;
};

/// Delete(x, y, h): remove the x - y adjacency and orient y - h as y -> h.
struct DeleteOp {
    int x;
    int y;
    std::vector<int> h;
};

/// Valid inserts on a CPDAG in (x, y, t) lexicographic order. A negative
/// max_parents leaves the parent count of y unbounded.
std::vector<InsertOp> enumerate_inserts(const Pdag& g, int max_parents = -1);
std::vector<DeleteOp> enumerate_deletes(const Pdag& g);

/// Score change of y's family under the operator.
double insert_delta(const BicScorer& scorer, const Pdag& g, const InsertOp& op);
double delete_delta(const BicScorer& scorer, const Pdag& g, const DeleteOp& op);

/// Apply then re-complete to the CPDAG of the resulting class.
Cpdag apply_insert(const Pdag& g, const InsertOp& op);
Cpdag apply_delete(const Pdag& g, const DeleteOp& op);

std::string describe(const InsertOp& op);
std::string describe(const DeleteOp& op);

Cpdag ges_fit(const BicScorer& scorer, const GesConfig& cfg = {});

/// "ges" runs ges_fit; "oracle" returns `oracle`. Anything else throws
/// std::invalid_argument.
Cpdag local_discovery(const BicScorer& scorer, const std::string& method, const Cpdag* oracle = nullptr,
                      const GesConfig& cfg = {});

}  // namespace fedcaus
