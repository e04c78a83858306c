#include "cmdp/error.hpp"
#include "cmdp/policy.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cmdp;

namespace {

// Direct summation over the first 400 states; r^400 is far below double range.
double distance_by_summation(const Policy& a, const Policy& b, double r) {
    double d = 0.0;
    for (long i = 0; i < 400; ++i)
        if (a.action_at(i) != b.action_at(i)) d += std::pow(r, static_cast<double>(i));
    return d;
}

Policy two_action(std::vector<int> prefix, int tail, const ActionSpace& space) {
    std::vector<Action> p;
    for (int a : prefix) p.emplace_back(a);
    return Policy(std::move(p), ConstantTail{Action(tail)}).bind(space);
}

Policy random_policy(std::mt19937_64& rng, const ActionSpace& space) {
    std::uniform_int_distribution<int> len(0, 12);
    std::uniform_int_distribution<int> bit(0, 1);
    std::vector<int> prefix(static_cast<std::size_t>(len(rng)));
    for (auto& a : prefix) a = bit(rng);
    return two_action(prefix, bit(rng), space);
}

} // namespace

TEST_CASE("distance of a policy to itself is zero") {
    UniformActionSpace space(2);
    const auto u = two_action({1, 0, 1}, 0, space);
    CHECK(distance(u, u, MetricParams{}) == 0.0);
}

TEST_CASE("single disagreement at state 2 costs r squared") {
    UniformActionSpace space(2);
    const auto a = two_action({0, 0, 0, 0}, 0, space);
    const auto b = two_action({0, 0, 1, 0}, 0, space);
    CHECK(distance(a, b, MetricParams(0.1)) == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("disagreeing everywhere gives the full geometric series") {
    UniformActionSpace space(2);
    const auto a = two_action({}, 0, space);
    const auto b = two_action({}, 1, space);
    CHECK(distance(a, b, MetricParams(0.1)) == doctest::Approx(1.0 / 0.9).epsilon(1e-15));
    const auto c = two_action({1, 1, 0}, 1, space);
    const auto d = two_action({0}, 0, space);
    CHECK(distance(c, d, MetricParams(0.3)) == doctest::Approx(distance_by_summation(c, d, 0.3)).epsilon(1e-14));
}

TEST_CASE("in_ball follows the prefix structure") {
    UniformActionSpace space(2);
    const MetricParams m(0.1);
    const auto centre = two_action({0, 0, 0, 0, 0, 0}, 0, space);
    CHECK(in_ball(centre, centre, 1e-9, m));
    const auto deep = two_action({0, 0, 0, 0, 1, 1}, 1, space);
    CHECK(in_ball(deep, centre, 1e-3, m));
    const auto shallow = two_action({0, 1}, 0, space);
    CHECK_FALSE(in_ball(shallow, centre, 1e-2, m));
    CHECK_THROWS_AS(in_ball(centre, centre, 0.0, m), ModelError);
}

TEST_CASE("prefix agreement") {
    UniformActionSpace space(2);
    const auto a = two_action({0, 1, 0, 1, 0}, 1, space);
    CHECK(prefix_agreement(a, two_action({0, 1, 0, 1}, 0, space)) == 4);
    CHECK(prefix_agreement(a, two_action({1}, 1, space)) == -1);
    CHECK(prefix_agreement(a, two_action({0, 1, 0, 1, 0, 1, 1}, 1, space)) == kAgreeForever);
    CHECK(extensionally_equal(a, two_action({0, 1, 0, 1, 0, 1, 1}, 1, space)));
    // Prefixes agree, tails differ: the first disagreement is the longer prefix's end.
    CHECK(prefix_agreement(two_action({0, 0}, 0, space), two_action({0, 0}, 1, space)) == 1);
}

TEST_CASE("metric axioms and the prefix iff on random policies") {
    UniformActionSpace space(2);
    std::mt19937_64 rng(7);
    for (double r : {0.1, 0.25, 0.45}) {
        const MetricParams m(r);
        for (int t = 0; t < 2000; ++t) {
            const auto a = random_policy(rng, space);
            const auto b = random_policy(rng, space);
            const auto c = random_policy(rng, space);
            const double ab = distance(a, b, m);
            CHECK(ab == doctest::Approx(distance_by_summation(a, b, r)).epsilon(1e-13));
            CHECK(ab == distance(b, a, m));
            CHECK(distance(a, c, m) <= ab + distance(b, c, m) + 1e-12);
            CHECK((ab == 0.0) == extensionally_equal(a, b));
            const long long agree = prefix_agreement(a, b);
            for (long k = 0; k <= 14; ++k)
                CHECK((ab < std::pow(r, static_cast<double>(k))) == (agree >= k));
        }
    }
}

TEST_CASE("metric parameter range") {
    CHECK_THROWS_AS(MetricParams(0.0), ModelError);
    CHECK_THROWS_AS(MetricParams(0.5), ModelError);
    CHECK_THROWS_AS(MetricParams(-0.1), ModelError);
    CHECK(MetricParams().r() == 0.1);
}

TEST_CASE("policy literals") {
    const auto p = Policy::parse("prefix=[(1|0), (1|1)];tail=all-on;label=x");
    CHECK(p.prefix_length() == 2);
    CHECK(p.prefix()[0] == Action(std::vector<int>{1, 0}));
    CHECK(std::holds_alternative<AllOnTail>(p.tail()));
    CHECK(p.label() == "x");
    CHECK(Policy::parse(p.to_string()).to_string() == p.to_string());
    CHECK(Policy::parse("prefix=[];tail=constant((1))").tail() == TailRule{ConstantTail{Action(1)}});
    CHECK_THROWS_AS(Policy::parse("prefix=[1"), ModelError);
    CHECK_THROWS_AS(Policy::parse("prefix=[1];tail=sometimes"), ModelError);
    CHECK_THROWS_AS(Policy::parse("tail=constant(0)"), ModelError);
}

TEST_CASE("binding rejects inadmissible actions and unresolvable tails") {
    UniformActionSpace space(2);
    CHECK_THROWS_AS(Policy::parse("prefix=[0,2];tail=constant(0)").bind(space), ModelError);
    CHECK_THROWS_AS(Policy::parse("prefix=[];tail=constant(5)").bind(space), ModelError);
    CHECK_THROWS_AS(Policy::parse("prefix=[];tail=all-on").bind(space), ModelError);
    const auto unbound = Policy::parse("prefix=[0];tail=constant(0)");
    CHECK_THROWS_AS(distance(unbound, unbound, MetricParams{}), ModelError);
    UniformActionSpace other(2);
    CHECK_THROWS_AS(distance(unbound.bind(space), unbound.bind(other), MetricParams{}), ModelError);
}

TEST_CASE("prefix enumeration") {
    UniformActionSpace space(2);
    const auto none = enumerate_prefixes(space, 0, ConstantTail{Action(0)});
    REQUIRE(none.size() == 1);
    CHECK(none[0].prefix_length() == 0);

    const auto eight = enumerate_prefixes(space, 3, ConstantTail{Action(1)});
    REQUIRE(eight.size() == 8);
    CHECK(eight.front().to_string() == "prefix=[0,0,0];tail=constant(1)");
    CHECK(eight[1].to_string() == "prefix=[0,0,1];tail=constant(1)");
    CHECK(eight.back().to_string() == "prefix=[1,1,1];tail=constant(1)");
    for (std::size_t i = 0; i < eight.size(); ++i)
        for (std::size_t j = i + 1; j < eight.size(); ++j) CHECK_FALSE(extensionally_equal(eight[i], eight[j]));

    UniformActionSpace three(3);
    PrefixEnumerator it(three, 4, ConstantTail{Action(0)});
    CHECK(it.cardinality() == 81);
    std::size_t n = 0;
    while (it.next()) ++n;
    CHECK(n == 81);

    try {
        enumerate_prefixes(space, 10, ConstantTail{Action(0)}, 100);
        FAIL("expected a search-space error");
    } catch (const SearchSpaceError& e) {
        CHECK(std::string(e.what()).find("search space too large") != std::string::npos);
    }
}
