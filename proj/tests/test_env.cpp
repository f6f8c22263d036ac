#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "skewfront/env.hpp"
#include "skewfront/stats.hpp"
#include "test_support.hpp"

using namespace skewfront;

TEST_CASE("constant d=3 environment matches the projected data") {
    auto env = generate(testsup::constant_config(3, 1.0, 3, 5));
    CHECK(env.skewness(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(env.skewness(2) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(env.skewness(3) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(env.interface(0) == 0.0);
    CHECK(env.interface(1) == doctest::Approx(1.0));
    CHECK(env.interface(2) == doctest::Approx(2.0));
    CHECK(env.interface(3) == doctest::Approx(3.0));
}

TEST_CASE("d=2 forces p=1/2") {
    EnvConfig cfg;
    cfg.degree_support = {{2, 1.0}};
    cfg.length_law = LengthLaw::uniform(0.5, 2.0);
    cfg.horizon = 5;
    cfg.seed = 1;
    auto env = generate(cfg);
    for (int i = 1; i <= 5; ++i) CHECK(env.skewness(i) == 0.5);
    CHECK(env.is_degenerate_line());
}

TEST_CASE("same seed twice is bit-identical; p*d = d-1 exactly") {
    auto a = generate(testsup::random_config(77));
    auto b = generate(testsup::random_config(77));
    CHECK(a.degrees() == b.degrees());
    CHECK(a.lengths() == b.lengths());
    for (std::size_t i = 1; i <= a.horizon(); ++i) {
        const auto ii = static_cast<std::int64_t>(i);
        CHECK(a.skewness(ii) * a.degree(ii) == doctest::Approx(a.degree(ii) - 1.0).epsilon(1e-15));
        CHECK(a.skewness(ii) >= 0.5);
        CHECK(a.skewness(ii) <= 3.0 / 4.0); // (d_bar-1)/d_bar for d_bar = 4
    }
}

TEST_CASE("symmetry accessors are exact") {
    auto env = generate(testsup::random_config(8));
    for (int i = 1; i <= 50; ++i) {
        CHECK(env.skewness(i) + env.skewness(-i) == 1.0);
        CHECK(env.interface(i) + env.interface(-i) == 0.0);
        CHECK(env.edge_length(-i) == env.edge_length(i - 1));
    }
}

TEST_CASE("interfaces strictly increasing with gaps equal to lengths") {
    auto env = generate(testsup::random_config(8));
    for (std::size_t i = 0; i + 1 <= env.horizon(); ++i) {
        const auto ii = static_cast<std::int64_t>(i);
        CHECK(env.interface(ii + 1) > env.interface(ii));
        CHECK(env.interface(ii + 1) - env.interface(ii) ==
              doctest::Approx(env.edge_length(ii)).epsilon(1e-12));
    }
}

TEST_CASE("LLN sanity on the generator") {
    auto cfg = testsup::random_config(19, 20000);
    auto env = generate(cfg);
    OnlineStats s;
    for (double l : env.lengths()) s.add(l);
    CHECK(std::abs(s.mean - cfg.length_law.mean_length()) < 3.0 * s.std_error());
}

TEST_CASE("extension reproduces the prefix bit-exactly") {
    auto env = generate(testsup::random_config(4, 100));
    auto ext = extended(env, 1000);
    REQUIRE(ext.horizon() == 1000);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(ext.degrees()[i] == env.degrees()[i]);
        CHECK(ext.lengths()[i] == env.lengths()[i]);
    }
}

TEST_CASE("invalid configurations are rejected by field") {
    EnvConfig cfg = testsup::random_config(1);
    cfg.degree_support = {{3, 0.5}, {4, 0.6}};
    CHECK_THROWS_AS(generate(cfg), ConfigError);

    cfg = testsup::random_config(1);
    cfg.degree_support = {{1, 1.0}};
    CHECK_THROWS_AS(generate(cfg), ConfigError);

    cfg = testsup::random_config(1);
    cfg.length_law = LengthLaw::uniform(2.0, 0.5);
    CHECK_THROWS_AS(generate(cfg), ConfigError);
}

TEST_CASE("save/load round trip is lossless") {
    auto env = generate(testsup::random_config(123, 64));
    const std::string path = "env_roundtrip_test.json";
    save(env, path);
    auto back = load(path);
    CHECK(back.degrees() == env.degrees());
    CHECK(back.lengths() == env.lengths()); // bit-exact doubles via round-trip decimals
    CHECK(back.seed() == env.seed());
    CHECK(back.digest() == env.digest());
    std::remove(path.c_str());
}

TEST_CASE("loading an environment with degree < 2 is a validation error") {
    const std::string path = "env_bad_degree_test.json";
    {
        std::ofstream out(path);
        out << R"({"schema_version":1,"seed":1,"degrees":[1,3],"lengths":[1.0,1.0]})";
    }
    CHECK_THROWS_AS(load(path), ValidationError);
    std::remove(path.c_str());
}

TEST_CASE("loading a file without lengths is a parse error") {
    const std::string path = "env_missing_lengths_test.json";
    {
        std::ofstream out(path);
        out << R"({"schema_version":1,"seed":1,"degrees":[3,3]})";
    }
    CHECK_THROWS_AS(load(path), ParseError);
    std::remove(path.c_str());
}

TEST_CASE("malformed json is a parse error") {
    const std::string path = "env_malformed_test.json";
    {
        std::ofstream out(path);
        out << "{not json";
    }
    CHECK_THROWS_AS(load(path), ParseError);
    std::remove(path.c_str());
}
