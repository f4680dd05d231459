#include "fedcaus/metrics.hpp"

#include <stdexcept>

namespace fedcaus {

namespace {
double ratio(int num, int den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }
}  // namespace

int shd(const Pdag& estimate, const Pdag& truth) {
    if (estimate.node_count() != truth.node_count()) throw std::invalid_argument("node count differs");
    int count = 0;
    for (int i = 0; i < truth.node_count(); ++i)
        for (int j = i + 1; j < truth.node_count(); ++j)
            if (estimate.mark(i, j) != truth.mark(i, j)) ++count;
    return count;
}

EvalResult orientation_f1(const Pdag& estimate, const Dag& truth, bool skeleton_only) {
    if (estimate.node_count() != truth.node_count()) throw std::invalid_argument("node count differs");
    EvalResult r;
    const int d = truth.node_count();
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            const bool t = truth.has_edge(i, j);
            if (skeleton_only) {
                if (j < i) continue;
                const bool e = estimate.adjacent(i, j);
                const bool ta = truth.pdag().adjacent(i, j);
                r.oriented_estimate += e;
                r.oriented_truth += ta;
                if (e && ta) ++r.tp;
                if (e && !ta) ++r.fp;
                if (!e && ta) ++r.fn;
                continue;
            }
            const bool e = estimate.has_directed(i, j);
            r.oriented_estimate += e;
            r.oriented_truth += t;
            if (e && t) ++r.tp;
            if (e && !t) ++r.fp;
            if (!e && t) ++r.fn;
        }
    }
    r.precision = ratio(r.tp, r.tp + r.fp);
    r.recall = ratio(r.tp, r.tp + r.fn);
    r.f1 = r.precision + r.recall == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

EvalResult evaluate(const Pdag& estimate, const Dag& truth) {
    EvalResult r = orientation_f1(estimate, truth);
    r.shd = shd(estimate, truth);
    return r;
}

}  // namespace fedcaus
