#pragma once

#include "fedcaus/graph.hpp"

namespace fedcaus {

struct EvalResult {
    int shd = 0;
    int tp = 0;
    int fp = 0;
    int fn = 0;
    int oriented_estimate = 0;
    int oriented_truth = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Unordered pairs whose marks differ; all four mark states are distinct.
int shd(const Pdag& estimate, const Pdag& truth);

/// Counts only correctly directed edges as hits. Undirected estimate edges
/// earn nothing. With skeleton_only, any adjacency matching a truth edge is
/// a hit instead.
EvalResult orientation_f1(const Pdag& estimate, const Dag& truth, bool skeleton_only = false);

/// shd plus orientation counts in one record.
EvalResult evaluate(const Pdag& estimate, const Dag& truth);

}  // namespace fedcaus
