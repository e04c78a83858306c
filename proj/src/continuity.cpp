#include "cmdp/continuity.hpp"

#include "cmdp/error.hpp"
#include "cmdp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

namespace cmdp {

ContinuityReport sigma_report(const GroupServerModel& model, const Policy& u, const Policy& u2, double tol,
                              const MetricParams& metric) {
    ContinuityReport r;
    r.agreement_k = prefix_agreement(u, u2);
    r.distance = distance(u, u2, metric);
    if (r.agreement_k < 0)
        throw ModelError("policies differ at state 0; sigma needs agreement through some state n >= 0 "
                         "(distance " + std::to_string(r.distance) + ")");
    r.n = r.agreement_k == kAgreeForever ? std::max(u.prefix_length(), u2.prefix_length())
                                         : static_cast<long>(r.agreement_k);

    const auto s1 = steady_state(model, u, tol);
    const auto s2 = steady_state(model, u2, tol);
    r.sigma = std::expm1(s1.log_normalizer - s2.log_normalizer);
    r.delta_u = delta(model, u, r.n);
    r.delta_u2 = delta(model, u2, r.n);
    if (r.delta_u.value == 0.0 && r.delta_u2.value == 0.0) {
        r.sandwich_strict = r.sigma == 0.0;
    } else {
        r.sandwich_strict = -r.delta_u2.value < r.sigma && r.sigma < r.delta_u.value;
    }
    return r;
}

ContinuityReport eta_diff_bound(const GroupServerModel& model, const Policy& u, const Policy& u2, double tol,
                                const MetricParams& metric) {
    auto r = sigma_report(model, u, u2, tol, metric);
    const auto e1 = evaluate(model, u, tol);
    const auto e2 = evaluate(model, u2, tol);
    const long n1 = e1.truncation;
    const long n2 = e2.truncation;
    // The decomposition holds for any head length up to the agreement state.
    const long agree = r.agreement_k == kAgreeForever ? std::max(n1, n2) : r.n;
    const long h = std::min({agree, n1, n2});
    r.head_states = h;

    double residual = 0.0;
    for (long m = 0; m <= h; ++m) {
        const auto i = static_cast<std::size_t>(m);
        r.head_sum += e1.pi[i] * e1.cost[i];
        if (e2.pi[i] > 0.0)
            residual = std::max(residual, std::abs(e2.pi[i] - (1.0 + r.sigma) * e1.pi[i]) / e2.pi[i]);
    }
    r.head_scaling_residual = residual;
    r.head_term = r.sigma * r.head_sum;

    double tail1 = 0.0, abs1 = 0.0, tail2 = 0.0, abs2 = 0.0;
    for (long m = h + 1; m <= n1; ++m) {
        const double c = e1.pi[static_cast<std::size_t>(m)] * e1.cost[static_cast<std::size_t>(m)];
        tail1 += c;
        abs1 += std::abs(c);
    }
    for (long m = h + 1; m <= n2; ++m) {
        const double c = e2.pi[static_cast<std::size_t>(m)] * e2.cost[static_cast<std::size_t>(m)];
        tail2 += c;
        abs2 += std::abs(c);
    }
    r.tail_term = tail2 - tail1;
    r.eta_u = e1.eta->value;
    r.eta_u2 = e2.eta->value;
    r.eta_diff = r.eta_u2 - r.eta_u;
    r.eta_error = e1.eta->bound + e2.eta->bound;
    r.tail_term_bound = abs1 + abs2 + r.eta_error;
    r.rigorous_bound = std::abs(r.sigma) * std::abs(r.head_sum) + r.tail_term_bound;
    r.bound_holds = std::abs(r.eta_diff) <= r.rigorous_bound + 1e-10;
    return r;
}

std::vector<Policy> sample_neighbours(const ActionSpace& space, const Policy& u, long k,
                                      const SamplerOptions& sampler) {
    if (!u.is_bound() || u.bound_to() != space.space_id()) throw ModelError("policy is not bound to this model");
    if (k < 0) throw ModelError("ball index k must be nonnegative");
    if (sampler.window < 1) throw ModelError("sampler window must be at least 1");

    const long length = std::max(u.prefix_length(), k + 1 + sampler.window);
    std::vector<Action> base;
    base.reserve(static_cast<std::size_t>(length));
    for (long s = 0; s < length; ++s) base.push_back(u.action_at(s));
    const Action tail = u.tail_action();

    auto alternatives = [&](long s, const Action& current) {
        std::vector<Action> alt;
        for (const auto& a : space.actions_at(s))
            if (a != current) alt.push_back(a);
        return alt;
    };
    const auto tail_alt = alternatives(length, tail);

    std::vector<Policy> out;
    out.push_back(u);
    auto emit = [&](std::vector<Action> prefix, const Action& t) {
        out.push_back(Policy(std::move(prefix), ConstantTail{t}).bind(space, false));
    };

    for (const auto& a : alternatives(k + 1, base[static_cast<std::size_t>(k + 1)])) {
        auto p = base;
        p[static_cast<std::size_t>(k + 1)] = a;
        emit(std::move(p), tail);
    }
    {
        auto p = base;
        bool changed = false;
        for (long s = k + 1; s < length; ++s) {
            const auto alt = alternatives(s, p[static_cast<std::size_t>(s)]);
            if (!alt.empty()) {
                p[static_cast<std::size_t>(s)] = alt.front();
                changed = true;
            }
        }
        if (!tail_alt.empty()) emit(p, tail_alt.front());
        else if (changed) emit(p, tail);
    }
    for (const auto& t : tail_alt) emit(base, t);

    if (out.size() == 1) return out; // nothing to mutate beyond k

    std::mt19937_64 rng(sampler.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(k + 1));
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < sampler.samples; ++i) {
        auto p = base;
        for (long s = k + 1; s < length; ++s) {
            if (!coin(rng)) continue;
            const auto set = space.actions_at(s);
            std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);
            p[static_cast<std::size_t>(s)] = set[pick(rng)];
        }
        Action t = tail;
        if (coin(rng)) {
            const auto set = space.actions_at(length);
            std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);
            t = set[pick(rng)];
        }
        emit(std::move(p), t);
    }
    return out;
}

ModulusScan modulus_scan(const PolicyEvaluator& evaluator, const Policy& u, const std::vector<long>& ks,
                         const SamplerOptions& sampler, double tol) {
    if (ks.empty()) throw ModelError("modulus scan needs at least one k");
    if (!std::is_sorted(ks.begin(), ks.end()) || std::adjacent_find(ks.begin(), ks.end()) != ks.end())
        throw ModelError("ks must be strictly ascending");
    evaluator.evaluate(u, tol); // fail fast when u itself cannot be evaluated

    ModulusScan scan;
    for (long k : ks) {
        const auto neighbours = sample_neighbours(evaluator.space(), u, k, sampler);
        std::vector<std::optional<PairBound>> results(neighbours.size());
        parallel_for(neighbours.size(), sampler.workers, [&](std::size_t i) {
            try {
                results[i] = evaluator.pair_bound(u, neighbours[i], tol);
            } catch (const NonErgodicPolicyError&) {
            } catch (const NumericalError&) {
            }
        });
        ScanRow row;
        row.k = k;
        row.exhausted = neighbours.size() == 1;
        for (const auto& r : results) {
            if (!r) {
                ++row.skipped;
                continue;
            }
            ++row.samples;
            row.max_diff = std::max(row.max_diff, std::abs(r->diff));
            row.max_bound = std::max(row.max_bound, r->bound);
            row.rigorous = row.rigorous && r->rigorous;
        }
        scan.rows.push_back(row);
    }
    auto nonincreasing = [](double prev, double cur) { return cur <= prev * (1.0 + 1e-9) + 1e-12; };
    for (std::size_t i = 1; i < scan.rows.size(); ++i) {
        if (!nonincreasing(scan.rows[i - 1].max_diff, scan.rows[i].max_diff)) scan.diff_nonincreasing = false;
        if (!nonincreasing(scan.rows[i - 1].max_bound, scan.rows[i].max_bound)) scan.bound_nonincreasing = false;
    }
    if (scan.rows.size() >= 2) {
        const double first = scan.rows.front().max_diff;
        const double last = scan.rows.back().max_diff;
        scan.modulus_stalls = last > 0.5 * first && last > 1e-6;
    }
    return scan;
}

} // namespace cmdp
