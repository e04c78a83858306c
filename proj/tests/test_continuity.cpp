#include "cmdp/continuity.hpp"
#include "cmdp/error.hpp"

#include <doctest.h>

#include <cmath>

using namespace cmdp;

namespace {

// Two servers at rate 0.5 each: all-on has rho = 0.5, one server alone is
// critically loaded.
GroupServerModel pair_pool() {
    return GroupServerModel(0.5, {{2, 0.5, 0.2}}, HoldingCost::polynomial({0.0, 1.0}));
}

GroupServerModel two_groups() {
    return GroupServerModel(1.0, {{1, 2.0, 1.0}, {1, 1.0, 1.0}}, HoldingCost::polynomial({0.0, 1.0}));
}

} // namespace

TEST_CASE("sigma vanishes for identical policies") {
    const auto m = two_groups();
    const auto u = Policy::parse("prefix=[(0|0),(1|0)];tail=all-on").bind(m);
    const auto r = eta_diff_bound(m, u, u, 1e-10);
    CHECK(r.sigma == 0.0);
    CHECK(r.eta_diff == 0.0);
    CHECK(r.rigorous_bound >= 0.0);
    CHECK(r.sandwich_strict);
    CHECK(r.bound_holds);
}

TEST_CASE("deep-tail changes barely move the normaliser") {
    const auto m = pair_pool();
    const auto u = Policy::parse("prefix=[(0)];tail=all-on").bind(m);
    std::string lit = "prefix=[(0)";
    for (int n = 1; n <= 10; ++n) lit += ",(2)";
    for (int n = 11; n <= 15; ++n) lit += ",(1)";
    lit += "];tail=all-on";
    const auto v = Policy::parse(lit).bind(m);
    const auto r = sigma_report(m, u, v, 1e-12);
    CHECK(r.agreement_k == 10);
    CHECK(r.delta_u.value == doctest::Approx(std::pow(0.5, 11) / 0.5).epsilon(1e-12));
    // Five critically loaded states past 10 add about 5 * 2^-11 to the normaliser.
    CHECK(std::abs(r.sigma) < std::pow(2.0, -7));
    CHECK(r.sigma < r.delta_u.value + r.delta_u2.value);
    CHECK(r.sandwich_strict);
}

TEST_CASE("no arrivals means no perturbation") {
    GroupServerModel m(0.0, {{2, 0.5, 0.2}}, HoldingCost::polynomial({0.0, 1.0}));
    const auto u = Policy::parse("prefix=[(0),(2)];tail=all-on").bind(m);
    const auto v = Policy::parse("prefix=[(0),(2),(1)];tail=all-on").bind(m);
    const auto r = eta_diff_bound(m, u, v, 1e-10);
    CHECK(r.sigma == 0.0);
    CHECK(r.sandwich_strict);
    CHECK(r.bound_holds);
}

TEST_CASE("disagreement at state 0 is refused") {
    const auto m = two_groups();
    const auto u = Policy::parse("prefix=[(0|0)];tail=all-on").bind(m);
    const auto v = Policy::parse("prefix=[(1|0)];tail=all-on").bind(m);
    CHECK_THROWS_AS(sigma_report(m, u, v, 1e-8), ModelError);
}

TEST_CASE("decomposition and head scaling") {
    const auto m = two_groups();
    const auto u = Policy::parse("prefix=[(0|0),(1|0),(1|0),(1|1),(1|0)];tail=all-on").bind(m);
    const auto v = Policy::parse("prefix=[(0|0),(1|0),(1|0),(1|0),(1|1),(1|0)];tail=all-on").bind(m);
    const auto r = eta_diff_bound(m, u, v, 1e-12);
    CHECK(r.agreement_k == 2);
    CHECK(r.head_scaling_residual <= 1e-8);
    CHECK(r.head_term + r.tail_term == doctest::Approx(r.eta_diff).epsilon(1e-9));
    CHECK(std::abs(r.eta_diff) <= r.rigorous_bound);
    CHECK(r.sandwich_strict);
}

TEST_CASE("bound at agreement 20 is of order 2^-20") {
    const auto m = pair_pool();
    const auto u = Policy::parse("prefix=[(0)];tail=all-on").bind(m);
    std::string lit = "prefix=[(0)";
    for (int n = 1; n <= 20; ++n) lit += ",(2)";
    lit += ",(1),(1),(1)];tail=all-on";
    const auto v = Policy::parse(lit).bind(m);
    const auto r = eta_diff_bound(m, u, v, 1e-14);
    CHECK(r.agreement_k == 20);
    CHECK(std::abs(r.eta_diff) <= r.rigorous_bound);
    CHECK(r.rigorous_bound < (std::abs(r.eta_u) + 3.0) * std::pow(2.0, -20) * 100.0);
}

TEST_CASE("line chain 1 is continuous at all-advance") {
    LineEvaluator ev(LineChainModel::example1());
    const auto u = Policy::parse("prefix=[1];tail=constant(1)").bind(ev.space());
    for (long k = 1; k <= 12; ++k) {
        for (const auto& v : sample_neighbours(ev.space(), u, k, SamplerOptions{})) {
            CHECK(prefix_agreement(u, v) >= k);
            CHECK(std::abs(ev.pair_bound(u, v, 1e-8).diff) < 1.0 / static_cast<double>(k));
        }
    }
}

TEST_CASE("scan with nothing to mutate") {
    GroupServerModel m(0.5, {{1, 1.0, 0.0}}, HoldingCost::polynomial({0.0, 1.0}));
    QueueEvaluator ev(m);
    const auto u = Policy::parse("prefix=[(1)];tail=all-on").bind(m);
    const auto scan = modulus_scan(ev, u, {0}, SamplerOptions{}, 1e-8);
    REQUIRE(scan.rows.size() == 1);
    CHECK(scan.rows[0].exhausted);
    CHECK(scan.rows[0].max_diff == 0.0);
    CHECK(scan.rows[0].samples == 1);
}

TEST_CASE("queue scan decays with k") {
    QueueEvaluator ev(two_groups());
    const auto u = Policy::parse("prefix=[(0|0)];tail=all-on").bind(ev.space());
    SamplerOptions opts;
    opts.samples = 24;
    const auto scan = modulus_scan(ev, u, {2, 5, 10}, opts, 1e-10);
    REQUIRE(scan.rows.size() == 3);
    CHECK(scan.rows[0].max_bound > scan.rows[1].max_bound);
    CHECK(scan.rows[1].max_bound > scan.rows[2].max_bound);
    CHECK(scan.diff_nonincreasing);
    CHECK(scan.bound_nonincreasing);
    CHECK_FALSE(scan.modulus_stalls);
    for (const auto& row : scan.rows) CHECK(row.max_diff <= row.max_bound);
}

TEST_CASE("line chain 2 modulus does not vanish") {
    LineEvaluator ev(LineChainModel::example2());
    const auto u = Policy::parse("prefix=[1];tail=constant(1)").bind(ev.space());
    const std::vector<long> ks = {1, 2, 4, 8, 16};
    const auto scan = modulus_scan(ev, u, ks, SamplerOptions{}, 1e-8);
    for (const auto& row : scan.rows) CHECK(row.max_diff >= 1.0 - 1.0 / static_cast<double>(row.k));
    CHECK(scan.modulus_stalls);
}

TEST_CASE("neighbour sampling is deterministic and stays in the ball") {
    const auto m = two_groups();
    const auto u = Policy::parse("prefix=[(0|0),(1|0)];tail=all-on").bind(m);
    SamplerOptions opts;
    opts.seed = 99;
    const auto a = sample_neighbours(m, u, 3, opts);
    const auto b = sample_neighbours(m, u, 3, opts);
    REQUIRE(a.size() == b.size());
    const MetricParams metric;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].to_string() == b[i].to_string());
        CHECK(in_ball(a[i], u, std::pow(metric.r(), 3), metric));
    }
    CHECK_THROWS_AS(modulus_scan(QueueEvaluator(m), u, {}, opts, 1e-8), ModelError);
    CHECK_THROWS_AS(modulus_scan(QueueEvaluator(m), u, {3, 2}, opts, 1e-8), ModelError);
}
