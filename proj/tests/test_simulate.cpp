#include "cmdp/error.hpp"
#include "cmdp/simulate.hpp"

#include <doctest.h>

using namespace cmdp;

namespace {

GroupServerModel mm1(double lambda) {
    return GroupServerModel(lambda, {{1, 1.0, 0.0}}, HoldingCost::polynomial({0.0, 1.0}));
}

} // namespace

TEST_CASE("no arrivals: the cost of the empty state") {
    GroupServerModel m(0.0, {{2, 1.0, 0.7}}, HoldingCost::polynomial({3.0, 1.0}));
    const auto u = Policy::parse("prefix=[(1)];tail=all-on").bind(m);
    const auto est = simulate_eta(m, u, SimConfig{100.0, 10.0, 5, 4});
    CHECK(est.eta_hat == 3.0 + 0.7);
    CHECK(est.std_error == 0.0);
    CHECK(est.events == 0);
}

TEST_CASE("M/M/1 mean queue length") {
    const auto m = mm1(0.5);
    const auto u = Policy::parse("prefix=[];tail=all-on").bind(m);
    const auto est = simulate_eta(m, u, SimConfig{1e6, 1e3, 11, 20});
    CHECK(est.wide_ci.contains(1.0));
    CHECK(est.idle_ci.lo - 3 * est.std_error < 0.5);
    CHECK(std::abs(est.idle_fraction - 0.5) < 0.01);
    CHECK(est.ci.lo < est.eta_hat);
    CHECK(est.ci.hi > est.eta_hat);
    CHECK(est.wide_ci.hi - est.wide_ci.lo > est.ci.hi - est.ci.lo);
    CHECK(est.batch_means.size() == 20);
}

TEST_CASE("equal seeds give bit-identical estimates") {
    const auto m = mm1(0.7);
    const auto u = Policy::parse("prefix=[];tail=all-on").bind(m);
    const SimConfig cfg{2e4, 100.0, 42, 10};
    const auto a = simulate_eta(m, u, cfg);
    const auto b = simulate_eta(m, u, cfg);
    CHECK(a.eta_hat == b.eta_hat);
    CHECK(a.batch_means == b.batch_means);
    const auto reps = simulate_replications(m, u, cfg, 4, 4);
    CHECK(reps[0].eta_hat == a.eta_hat);
    CHECK(reps[1].eta_hat != a.eta_hat);
}

TEST_CASE("configuration checks") {
    const auto m = mm1(0.5);
    const auto u = Policy::parse("prefix=[];tail=all-on").bind(m);
    CHECK_THROWS_AS(simulate_eta(m, u, SimConfig{10.0, 0.0, 1, 5}), ModelError);
    CHECK_THROWS_AS(simulate_eta(m, u, SimConfig{10.0, 20.0, 1, 5}), ModelError);
    CHECK_THROWS_AS(simulate_eta(m, u, SimConfig{10.0, 1.0, 1, 1}), ModelError);
    const auto hot = mm1(2.0);
    const auto v = Policy::parse("prefix=[];tail=all-on").bind(hot);
    CHECK_FALSE(simulate_eta(hot, v, SimConfig{100.0, 10.0, 1, 5}).warnings.empty());
}

TEST_CASE("t quantile") {
    CHECK(t_quantile_975(1) == doctest::Approx(12.7062).epsilon(1e-4));
    CHECK(t_quantile_975(19) == doctest::Approx(2.0930).epsilon(1e-4));
}
