#include "cmdp/optimizer.hpp"

#include "cmdp/error.hpp"
#include "cmdp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cmdp {

SearchResult exhaustive_search(const PolicyEvaluator& evaluator, long length, const TailRule& tail,
                               const SearchOptions& opts) {
    if (length < 0) throw ModelError("prefix length must be nonnegative");
    if (!(opts.tol > 0.0)) throw ModelError("tolerance must be positive");
    auto policies = enumerate_prefixes(evaluator.space(), length, tail, opts.cap);

    std::vector<std::optional<Estimate>> etas(policies.size());
    std::vector<std::string> reasons(policies.size());
    parallel_for(policies.size(), opts.workers, [&](std::size_t i) {
        try {
            etas[i] = evaluator.evaluate(policies[i], opts.tol);
        } catch (const NonErgodicPolicyError& e) {
            reasons[i] = e.what();
        } catch (const NumericalError& e) {
            reasons[i] = e.what();
        }
    });

    const Objective objective = opts.objective.value_or(evaluator.objective());
    const bool maximize = objective == Objective::maximize;
    auto better = [&](double a, double b) { return maximize ? a > b : a < b; };

    std::optional<std::size_t> best;
    std::optional<std::size_t> second;
    std::uint64_t skipped = 0;
    for (std::size_t i = 0; i < etas.size(); ++i) {
        if (!etas[i]) {
            ++skipped;
            continue;
        }
        if (!best || better(etas[i]->value, etas[*best]->value)) {
            second = best;
            best = i;
        } else if (!second || better(etas[i]->value, etas[*second]->value)) {
            second = i;
        }
    }
    if (!best) throw NumericalError("every candidate policy is unstable or non-ergodic");

    SearchResult result{policies[*best], *etas[*best], objective, 0, 0, std::nullopt, std::nullopt, {}};
    result.evaluated = policies.size() - skipped;
    result.skipped = skipped;
    if (second) result.runner_up_gap = std::abs(etas[*second]->value - etas[*best]->value);
    if (const auto* queue = dynamic_cast<const GroupServerModel*>(&evaluator.space()))
        result.cmu = verify_cmu(*queue, result.best_policy);
    result.candidates.reserve(policies.size());
    for (std::size_t i = 0; i < policies.size(); ++i)
        result.candidates.push_back({std::move(policies[i]), etas[i], std::move(reasons[i])});
    return result;
}

std::vector<int> cmu_priority(const GroupServerModel& model) {
    const auto groups = model.groups();
    std::vector<int> order(groups.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return groups[static_cast<std::size_t>(a)].cost / groups[static_cast<std::size_t>(a)].rate <
               groups[static_cast<std::size_t>(b)].cost / groups[static_cast<std::size_t>(b)].rate;
    });
    return order;
}

Policy cmu_policy(const GroupServerModel& model, const std::vector<long>& thresholds) {
    const auto groups = model.groups();
    std::size_t servers = 0;
    for (const auto& g : groups) servers += static_cast<std::size_t>(g.servers);
    if (thresholds.size() != servers)
        throw ModelError("expected one threshold per server (" + std::to_string(servers) + "), got " +
                         std::to_string(thresholds.size()));
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw ModelError("thresholds must be nondecreasing in priority order");
    if (thresholds.front() < 0) throw ModelError("thresholds must be nonnegative");

    std::vector<int> owner; // server slot -> group
    for (int g : cmu_priority(model))
        for (int s = 0; s < groups[static_cast<std::size_t>(g)].servers; ++s) owner.push_back(g);

    const long length = thresholds.back() + 1;
    std::vector<Action> prefix;
    for (long n = 0; n < length; ++n) {
        std::vector<int> on(groups.size(), 0);
        for (std::size_t s = 0; s < servers; ++s)
            if (n > thresholds[s]) ++on[static_cast<std::size_t>(owner[s])];
        if (n >= 1 && on[0] < model.action_floor())
            throw ModelError("thresholds leave fewer than " + std::to_string(model.action_floor()) +
                             " server(s) of the fastest group on at state " + std::to_string(n));
        prefix.emplace_back(std::move(on));
    }
    return Policy(std::move(prefix), AllOnTail{}, "cmu").bind(model);
}

CmuCheck verify_cmu(const GroupServerModel& model, const Policy& u) {
    const auto groups = model.groups();
    auto ratio = [&](std::size_t k) { return groups[k].cost / groups[k].rate; };
    auto check = [&](long state, const Action& a, CmuCheck& out) {
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (a[g] == 0) continue;
            for (std::size_t h = 0; h < groups.size(); ++h) {
                if (ratio(h) < ratio(g) && a[h] < groups[h].servers) {
                    out = {false, state, static_cast<int>(h), static_cast<int>(g)};
                    return true;
                }
            }
        }
        return false;
    };
    CmuCheck result;
    for (long n = 0; n < u.prefix_length(); ++n)
        if (check(n, u.action_at(n), result)) return result;
    check(u.prefix_length(), u.tail_action(), result);
    return result;
}

} // namespace cmdp
