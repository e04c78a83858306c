#include "cmdp/evaluator.hpp"

#include "cmdp/continuity.hpp"

#include <cmath>

namespace cmdp {

Estimate QueueEvaluator::evaluate(const Policy& u, double tol) const {
    const auto eta = average_cost(model_, u, tol);
    return {eta.value, eta.bound, true};
}

PairBound QueueEvaluator::pair_bound(const Policy& u, const Policy& v, double tol) const {
    PairBound pb;
    if (prefix_agreement(u, v) < 0) {
        const auto a = evaluate(u, tol);
        const auto b = evaluate(v, tol);
        pb.eta_u = a.value;
        pb.eta_v = b.value;
        pb.diff = b.value - a.value;
        pb.bound = std::abs(pb.diff) + a.error + b.error;
        pb.rigorous = true;
        return pb;
    }
    const auto r = eta_diff_bound(model_, u, v, tol);
    pb.eta_u = r.eta_u;
    pb.eta_v = r.eta_u2;
    pb.diff = r.eta_diff;
    pb.bound = r.rigorous_bound;
    pb.rigorous = r.bound_holds;
    return pb;
}

Estimate GenericEvaluator::evaluate(const Policy& u, double tol) const {
    const auto sol = evaluate_generic(*model_, u, tol, opts_);
    return {sol.eta->value, sol.eta->bound, sol.eta_tail_certified};
}

PairBound GenericEvaluator::pair_bound(const Policy& u, const Policy& v, double tol) const {
    const auto a = evaluate(u, tol);
    const auto b = evaluate(v, tol);
    PairBound pb;
    pb.eta_u = a.value;
    pb.eta_v = b.value;
    pb.diff = b.value - a.value;
    pb.bound = std::abs(pb.diff) + a.error + b.error;
    pb.rigorous = a.certified && b.certified;
    return pb;
}

Estimate LineEvaluator::evaluate(const Policy& u, double) const { return {eta_line(model_, u), 0.0, true}; }

PairBound LineEvaluator::pair_bound(const Policy& u, const Policy& v, double) const {
    PairBound pb;
    pb.eta_u = eta_line(model_, u);
    pb.eta_v = eta_line(model_, v);
    pb.diff = pb.eta_v - pb.eta_u;
    pb.bound = std::abs(pb.diff);
    pb.rigorous = true;
    return pb;
}

} // namespace cmdp
