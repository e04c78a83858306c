#include "cmdp/config.hpp"
#include "cmdp/error.hpp"

#include <doctest.h>

#include <string>

using namespace cmdp;

#ifndef CMDP_CONFIG_DIR
#error "CMDP_CONFIG_DIR must point at the sample configs"
#endif

namespace {
std::string cfg(const char* name) { return std::string(CMDP_CONFIG_DIR) + "/" + name; }
} // namespace

TEST_CASE("tokenizer and sections") {
    const auto f = ConfigFile::parse("# header\na = 1\nlist = [1, 2,\n 3]\nsec { x = y }\nsec {\n z = 2 }\n");
    CHECK(f.values.at("a").number("a") == 1.0);
    CHECK(f.values.at("list").numbers("list") == std::vector<double>{1, 2, 3});
    REQUIRE(f.sections.size() == 2);
    CHECK(f.sections[0].values.at("x").scalar("x") == "y");
    CHECK(f.sections[1].line == 6);
    CHECK_THROWS_AS(ConfigFile::parse("a = "), ModelError);
    CHECK_THROWS_AS(ConfigFile::parse("a = [1, 2"), ModelError);
    CHECK_THROWS_AS(ConfigFile::parse("sec { a = 1"), ModelError);
    CHECK_THROWS_AS(ConfigFile::parse("a = 1\na = 2"), ModelError);
    CHECK_THROWS_AS(f.values.at("list").number("list"), ModelError);
    CHECK_THROWS_AS(ConfigFile::parse("n = 1.5").values.at("n").integer("n"), ModelError);
}

TEST_CASE("sample configs load") {
    for (const char* name : {"mm1.cfg", "two_group.cfg", "signed.cfg", "onoff.cfg", "table_mm1.cfg",
                             "table_batch.cfg", "example1.cfg", "example2.cfg"}) {
        CAPTURE(name);
        const auto m = load_model_file(cfg(name));
        CHECK_FALSE(m.describe().empty());
        const auto u = m.default_policy();
        CHECK_NOTHROW(m.space().validate_policy(u));
    }
    const auto two = load_model_file(cfg("two_group.cfg"));
    REQUIRE(two.kind == ModelKind::queue);
    CHECK(two.metric.r() == 0.1);
    CHECK(two.queue->groups()[0].rate == 2.0);
    const auto tab = load_model_file(cfg("table_mm1.cfg"));
    REQUIRE(tab.kind == ModelKind::table);
    CHECK(tab.table->nu_majorant().has_value());
    CHECK(load_model_file(cfg("example2.cfg")).line->payoff() == LineChainModel::Payoff::complement);
    CHECK_THROWS_AS(load_model_file(cfg("missing.cfg")), ModelError);
}

TEST_CASE("queue and table configs agree") {
    const auto q = load_model_file(cfg("mm1.cfg"));
    const auto t = load_model_file(cfg("table_mm1.cfg"));
    const double eq = q.evaluator()->evaluate(q.default_policy(), 1e-10).value;
    const double et = t.evaluator(Engine::generic)->evaluate(t.default_policy(), 1e-10).value;
    CHECK(eq == doctest::Approx(et).epsilon(1e-8));
}

TEST_CASE("config errors name the line") {
    auto message = [](const char* text) {
        try {
            load_model(text);
        } catch (const ModelError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("model = queue\nlambda = 1\nbogus = 3\ngroup { m = 1, mu = 2, c = 0 }").find("line 3") !=
          std::string::npos);
    CHECK(message("model = queue\nlambda = 1\ngroup { m = 1, mu = 2, c = 0, extra = 1 }").find("line 3") !=
          std::string::npos);
    CHECK_FALSE(message("model = queue\ngroup { m = 1, mu = 2, c = 0 }").empty());
    CHECK_FALSE(message("model = queue\nlambda = 1").empty());
    CHECK_FALSE(message("model = galaxy").empty());
    CHECK_FALSE(message("lambda = 1").empty());
    CHECK_FALSE(message("model = queue\nlambda = -1\ngroup { m = 1, mu = 2, c = 0 }").empty());
    CHECK_FALSE(message("model = queue\nlambda = 1\ngroup { m = 1, mu = 2, c = 0 }\nmetric { r = 0.7 }").empty());
    CHECK_FALSE(message("model = line\nwhich = 3").empty());
}
