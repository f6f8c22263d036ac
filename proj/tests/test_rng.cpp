#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "skewfront/rng.hpp"
#include "skewfront/stats.hpp"

using namespace skewfront;

TEST_CASE("streams are deterministic and label-separated") {
    RngStream a1(42, "alpha", 0), a2(42, "alpha", 0);
    for (int i = 0; i < 64; ++i) CHECK(a1.next_u64() == a2.next_u64());

    RngStream b(42, "beta", 0), a3(42, "alpha", 0);
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (a3.next_u64() == b.next_u64()) ++same;
    CHECK(same == 0);

    RngStream s0(42, "alpha", 0), s1(42, "alpha", 1);
    same = 0;
    for (int i = 0; i < 64; ++i)
        if (s0.next_u64() == s1.next_u64()) ++same;
    CHECK(same == 0);
}

TEST_CASE("substream values are random-access") {
    // value at index i does not depend on whether other indices were drawn
    const double direct = stream_value(7, "env.lengths", 12345);
    for (std::uint64_t i = 0; i < 100; ++i) stream_value(7, "env.lengths", i);
    CHECK(stream_value(7, "env.lengths", 12345) == direct);
}

TEST_CASE("uniform moments") {
    RngStream rng(1, "moments", 0);
    OnlineStats s;
    for (int i = 0; i < 200000; ++i) s.add(rng.next_double());
    CHECK(std::abs(s.mean - 0.5) < 4.0 * s.std_error());
    CHECK(std::abs(s.variance() - 1.0 / 12.0) < 2e-3);
}

TEST_CASE("open interval draw never returns zero") {
    RngStream rng(9, "open", 0);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.next_open();
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
    }
}
