// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "cmdp/continuity.hpp"
#include "cmdp/error.hpp"
#include "cmdp/evaluator.hpp"
#include "cmdp/generic_ctmdp.hpp"
#include "cmdp/line_chain.hpp"
#include "cmdp/optimizer.hpp"
#include "cmdp/policy.hpp"
#include "cmdp/queue_model.hpp"
#include "cmdp/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace cmdp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

GroupServerModel two_group_model() {
    return GroupServerModel(1.0, {{1, 2.0, 1.0}, {1, 1.0, 1.0}}, HoldingCost::polynomial({0.0, 1.0}));
}

// ---- 1 ---------------------------------------------------------------

Outcome metric_laws() {
    const auto t0 = Clock::now();
    UniformActionSpace space(2);
    const MetricParams metric(0.1);
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> len(0, 16);
    std::uniform_int_distribution<int> bit(0, 1);
    auto random_policy = [&](const Policy* near) {
        std::vector<Action> prefix;
        const int n = len(rng);
        for (int i = 0; i < n; ++i) {
            // Half of the draws copy a neighbour's prefix to exercise long agreements.
            if (near && bit(rng) && i < near->prefix_length() + 4) prefix.push_back(near->action_at(i));
            else prefix.emplace_back(bit(rng));
        }
        return Policy(std::move(prefix), ConstantTail{Action(bit(rng))}).bind(space);
    };

    const int triples = 10000;
    long violations = 0;
    long iff_checks = 0;
    for (int t = 0; t < triples; ++t) {
        const auto a = random_policy(nullptr);
        const auto b = random_policy(&a);
        const auto c = random_policy(&b);
        const double ab = distance(a, b, metric);
        const double bc = distance(b, c, metric);
        const double ac = distance(a, c, metric);
        if (distance(a, a, metric) != 0.0) ++violations;
        if (ab != distance(b, a, metric)) ++violations;
        if ((ab == 0.0) != extensionally_equal(a, b)) ++violations;
        if (ab < 0.0) ++violations;
        // Each distance is a sum of at most ~20 powers; allow its rounding only.
        const double slack = 64 * std::numeric_limits<double>::epsilon() * (ab + bc);
        if (ac > ab + bc + slack) ++violations;
        const long long agree = prefix_agreement(a, b);
        for (long k = 0; k <= 24; ++k) {
            ++iff_checks;
            if ((ab < std::pow(0.1, static_cast<double>(k))) != (agree >= k)) ++violations;
        }
    }
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << triples << " triples, " << iff_checks << " iff checks, " << violations << " violations, " << secs << " s";
    return {violations == 0 && secs < 5.0, d.str()};
}

// ---- 2 ---------------------------------------------------------------

Outcome mm1_closed_form() {
    const auto t0 = Clock::now();
    GroupServerModel m(0.5, {{1, 1.0, 0.0}}, HoldingCost::polynomial({0.0, 1.0}));
    const auto u = Policy::parse("prefix=[];tail=all-on").bind(m);
    const auto eta = average_cost(m, u, 1e-12);
    const double rho = 0.5;
    const double oracle = rho / (1.0 - rho);
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d.precision(15);
    d << "eta " << eta.value << " vs " << oracle << ", bound " << eta.bound << ", " << secs << " s";
    return {std::abs(eta.value - oracle) <= 1e-8 && secs < 1.0, d.str()};
}

// ---- 3 ---------------------------------------------------------------

struct BdInstance {
    GroupServerModel model;
    const char* policy;
};

Outcome solver_equivalence() {
    std::vector<BdInstance> inst;
    for (double rho : {0.2, 0.35, 0.5, 0.65, 0.8, 0.9})
        inst.push_back({GroupServerModel(rho, {{1, 1.0, 0.0}}, HoldingCost::polynomial({0.0, 1.0})),
                        "prefix=[];tail=all-on"});
    // lambda = 1, mu = (2, 1): the all-on tail gives rho0 = 1/3, the fast server alone 1/2.
    inst.push_back({two_group_model(), "prefix=[(0|0),(1|0),(1|1)];tail=all-on"});
    inst.push_back({two_group_model(), "prefix=[(1|1),(1|0)];tail=constant((1|0))"});
    // lambda = 1.8, three servers at rate 1: rho0 = 0.6 at the tail.
    inst.push_back({GroupServerModel(1.8, {{3, 1.0, 0.5}}, HoldingCost::polynomial({1.0, 2.0})),
                    "prefix=[(0),(1),(2),(2)];tail=all-on"});
    // lambda = 2.7 with the same servers: rho0 = 0.9.
    inst.push_back({GroupServerModel(2.7, {{3, 1.0, 0.0}}, HoldingCost::polynomial({0.0, 1.0})),
                    "prefix=[(0),(1),(2)];tail=all-on"});
    inst.push_back({GroupServerModel(0.6, {{2, 0.5, 0.2}, {1, 1.5, 0.1}}, HoldingCost::polynomial({0.0, 0.0, 1.0})),
                    "prefix=[(0|0)];tail=all-on"});

    const double tol = 1e-12;
    double worst_pi = 0.0;
    double worst_eta = 0.0;
    double worst_scale = 0.0;
    int in_range = 0;
    for (const auto& in : inst) {
        const auto u = Policy::parse(in.policy).bind(in.model);
        const auto cert = stability_certificate(in.model, u);
        if (cert.stable && cert.rho0 >= 0.2 - 1e-12 && cert.rho0 <= 0.9 + 1e-12) ++in_range;
        const auto exact = evaluate(in.model, u, tol);
        const BirthDeathCtmdp g(in.model);
        const auto sol = evaluate_generic(g, u, tol);
        const std::size_t n = std::max(exact.pi.size(), sol.pi.size());
        for (std::size_t i = 0; i < n; ++i) {
            const double a = i < exact.pi.size() ? exact.pi[i] : 0.0;
            const double b = i < sol.pi.size() ? sol.pi[i] : 0.0;
            worst_pi = std::max(worst_pi, std::abs(a - b));
        }
        worst_eta = std::max(worst_eta, std::abs(exact.eta->value - sol.eta->value));

        std::vector<ServerGroup> fast(in.model.groups().begin(), in.model.groups().end());
        for (auto& grp : fast) grp.rate *= 10.0;
        const GroupServerModel scaled(in.model.arrival_rate() * 10.0, fast, in.model.holding(),
                                      in.model.action_floor());
        const BirthDeathCtmdp gs(scaled);
        const auto us = Policy::parse(in.policy).bind(scaled);
        const auto ssol = solve_nu(gs, us, tol);
        const auto base = solve_nu(g, u, tol);
        const std::size_t m = std::min(ssol.pi.size(), base.pi.size());
        for (std::size_t i = 0; i < m; ++i) worst_scale = std::max(worst_scale, std::abs(ssol.pi[i] - base.pi[i]));
    }
    std::ostringstream d;
    d << inst.size() << " instances (" << in_range << " with rho0 in [0.2, 0.9]), max |pi diff| " << worst_pi
      << ", max |eta diff| " << worst_eta << ", scaling residual " << worst_scale;
    const bool ok = inst.size() >= 10 && in_range >= 10 && worst_pi <= 1e-8 && worst_eta <= 1e-8 &&
                    worst_scale <= 1e-10;
    return {ok, d.str()};
}

// ---- 4 ---------------------------------------------------------------

Outcome continuity_soundness() {
    const auto model = two_group_model();
    const MetricParams metric(0.1);
    const double tol = 1e-10;
    const std::vector<const char*> centres = {
        "prefix=[];tail=all-on",
        "prefix=[(0|0),(1|0),(1|0),(1|1)];tail=all-on",
        "prefix=[(1|1),(1|0)];tail=constant((1|0))",
    };
    SamplerOptions so;
    so.samples = 12;
    so.seed = 99;
    long pairs = 0;
    long unstable = 0;
    long sandwich_fail = 0;
    long bound_fail = 0;
    double worst_ratio = 0.0;
    for (const char* lit : centres) {
        const auto u = Policy::parse(lit).bind(model);
        for (long k = 0; k <= 6; ++k) {
            for (const auto& v : sample_neighbours(model, u, k, so)) {
                ContinuityReport r;
                try {
                    r = eta_diff_bound(model, u, v, tol, metric);
                } catch (const NumericalError&) {
                    ++unstable;
                    continue;
                }
                ++pairs;
                if (!r.sandwich_strict) ++sandwich_fail;
                if (!(std::abs(r.eta_diff) <= r.rigorous_bound) || !r.bound_holds) ++bound_fail;
                if (r.rigorous_bound > 0.0) worst_ratio = std::max(worst_ratio, std::abs(r.eta_diff) / r.rigorous_bound);
            }
        }
    }

    QueueEvaluator ev(model);
    SamplerOptions scan_opts;
    scan_opts.samples = 24;
    const auto scan = modulus_scan(ev, Policy::parse(centres[0]).bind(model), {0, 1, 2, 3, 5, 8}, scan_opts, tol);
    std::ostringstream d;
    d << pairs << " pairs (" << unstable << " unstable skipped), sandwich failures " << sandwich_fail
      << ", bound failures " << bound_fail << ", max |diff|/bound " << worst_ratio << "; scan max_diff";
    for (const auto& row : scan.rows) d << ' ' << row.max_diff;
    const bool ok = pairs >= 100 && sandwich_fail == 0 && bound_fail == 0 && scan.diff_nonincreasing &&
                    scan.bound_nonincreasing;
    return {ok, d.str()};
}

// ---- 5 ---------------------------------------------------------------

Outcome example1() {
    const LineEvaluator ev(LineChainModel::example1());
    bool ok = true;
    std::ostringstream d;
    for (long L = 1; L <= 8; ++L) {
        const auto res = exhaustive_search(ev, L, ConstantTail{Action(1)});
        const auto all_one = Policy::parse("prefix=[];tail=constant(1)").bind(ev.space());
        const bool hit = res.best_eta.value == 0.0 && extensionally_equal(res.best_policy, all_one);
        ok = ok && hit;
        if (!hit) d << "L=" << L << " returned " << res.best_policy.to_string() << "; ";
    }
    d << "L = 1..8, optimum 0 at the all-1 policy" << (ok ? "" : " not reproduced");
    return {ok, d.str()};
}

// ---- 6 ---------------------------------------------------------------

Outcome example2() {
    const auto model = LineChainModel::example2();
    bool gaps = true;
    for (long L = 1; L <= 64; ++L) {
        const auto rep = stationary_supremum_gap(model, L);
        const double expect = 1.0 - 1.0 / static_cast<double>(L);
        if (std::abs(rep.max_stationary - expect) > 1e-15 || !(rep.max_stationary < 1.0)) gaps = false;
    }
    const long T = 100000;
    const double stream = history_stream_average(model, T);
    const auto blocks = history_block_averages(model, 446); // 446 blocks span about 1e5 steps
    const bool monotone = std::is_sorted(blocks.begin(), blocks.end());

    const LineEvaluator ev(model);
    const auto all_one = Policy::parse("prefix=[];tail=constant(1)").bind(model);
    SamplerOptions so;
    so.samples = 8;
    const std::vector<long> ks = {1, 2, 4, 8, 16, 32};
    const auto scan = modulus_scan(ev, all_one, ks, so, 1e-12);
    bool modulus = scan.modulus_stalls;
    for (const auto& row : scan.rows)
        if (row.max_diff < 1.0 - 1.0 / static_cast<double>(row.k)) modulus = false;

    std::ostringstream d;
    d << "max stationary 1-1/L for L <= 64: " << (gaps ? "yes" : "no") << ", stream average at T=1e5 " << stream
      << ", block averages nondecreasing: " << (monotone ? "yes" : "no") << ", scan max_diff";
    for (const auto& row : scan.rows) d << ' ' << row.max_diff;
    return {gaps && stream > 0.95 && monotone && modulus, d.str()};
}

// ---- 7 ---------------------------------------------------------------

Outcome cmu_rule() {
    const auto t0 = Clock::now();
    const QueueEvaluator ev(two_group_model());
    SearchOptions so;
    so.tol = 1e-10;
    const auto res = exhaustive_search(ev, 6, AllOnTail{}, so);
    const auto check = verify_cmu(ev.model(), res.best_policy);
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << res.evaluated << " policies, best " << res.best_policy.to_string() << " eta " << res.best_eta.value
      << ", c/mu conformant " << (check.conformant ? "yes" : "no") << ", " << secs << " s";
    return {check.conformant && secs < 60.0, d.str()};
}

// ---- 8 ---------------------------------------------------------------

Outcome signed_cost() {
    GroupServerModel m(0.5, {{1, 1.0, 0.0}}, HoldingCost::signed_linear());
    const auto u = Policy::parse("prefix=[];tail=all-on").bind(m);
    const auto eta = average_cost(m, u, 1e-12);
    // Independent oracle: sum_n (1 - rho) rho^n (-1)^n n, summed until the terms vanish.
    long double oracle = 0.0L;
    long double w = 0.5L;
    for (int n = 0; n < 200; ++n) {
        oracle += w * ((n % 2) ? -n : n);
        w *= 0.5L;
    }
    std::ostringstream d;
    d.precision(15);
    d << "eta " << eta.value << " vs series " << static_cast<double>(oracle) << " (-1/9 = " << -1.0 / 9.0 << ")";
    const bool ok = std::abs(eta.value - static_cast<double>(oracle)) <= 1e-8 && std::abs(eta.value + 1.0 / 9.0) <= 1e-8;
    return {ok, d.str()};
}

// ---- 9 ---------------------------------------------------------------

Outcome simulation() {
    struct Case {
        GroupServerModel model;
        const char* policy;
    };
    const std::vector<Case> cases = {
        {GroupServerModel(0.5, {{1, 1.0, 0.0}}, HoldingCost::polynomial({0.0, 1.0})), "prefix=[];tail=all-on"},
        {two_group_model(), "prefix=[(0|0),(1|0),(1|0)];tail=all-on"},
        {GroupServerModel(1.0, {{3, 1.0, 4.0}}, HoldingCost::polynomial({0.0, 1.0})),
         "prefix=[(0),(1),(1),(2)];tail=all-on"},
    };
    int inside = 0;
    int runs = 0;
    double slowest = 0.0;
    for (const auto& c : cases) {
        const auto u = Policy::parse(c.policy).bind(c.model);
        const double eta = average_cost(c.model, u, 1e-12).value;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto t0 = Clock::now();
            const auto est = simulate_eta(c.model, u, SimConfig{2e5, 1e3, seed, 20});
            slowest = std::max(slowest, seconds_since(t0));
            ++runs;
            if (est.wide_ci.contains(eta)) ++inside;
        }
    }
    std::ostringstream d;
    d << inside << '/' << runs << " runs contain the analytic value, slowest run " << slowest << " s";
    return {runs == 60 && inside >= 57 && slowest < 10.0, d.str()};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"metric laws", metric_laws},
        {"M/M/1 closed form", mm1_closed_form},
        {"truncation solver equivalence", solver_equivalence},
        {"continuity bound soundness", continuity_soundness},
        {"example 1 optimum", example1},
        {"example 2 stationary gap", example2},
        {"c/mu rule conformance", cmu_rule},
        {"signed holding cost", signed_cost},
        {"simulation cross-check", simulation},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        if (!out.pass) ++failed;
        std::printf("%s criterion %zu (%s): %s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    out.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
