#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "skewfront/mobius.hpp"
#include "skewfront/stats.hpp"
#include "test_support.hpp"

using namespace skewfront;

TEST_CASE("mobius_step basics") {
    const auto params = matrix_params(0.75, 1.3, 0.7);
    CHECK(mobius_step(0.0, params) == doctest::Approx(params.zeta).epsilon(1e-14));

    // zeta = 0 (d = 2): x -> x / gamma^2, fixed point 0
    const auto line = matrix_params(0.5, 1.0, 0.5);
    double x = 1.0;
    for (int i = 0; i < 50; ++i) {
        const double next = mobius_step(x, line);
        CHECK(next == doctest::Approx(x * line.inv_gamma_sq).epsilon(1e-14));
        x = next;
    }
    CHECK(x < 1e-20);

    // maps [0,1] into [0,1), monotone increasing in x
    RngStream rng(2, "mobius.prop", 0);
    for (int rep = 0; rep < 200; ++rep) {
        const auto p = matrix_params(0.5 + 0.49 * rng.next_double(),
                                     0.3 + 1.7 * rng.next_double(), 0.01 + 3.0 * rng.next_double());
        double prev = -1.0;
        for (double xx = 0.0; xx <= 1.0; xx += 0.1) {
            const double y = mobius_step(xx, p);
            CHECK(y >= 0.0);
            CHECK(y < 1.0);
            CHECK(y > prev);
            prev = y;
        }
    }
}

TEST_CASE("fixed point of the constant map equals the quadratic closed form") {
    const double p = 2.0 / 3.0, ell = 1.0, lam = 0.5;
    const auto params = matrix_params(p, ell, lam);
    double x = 0.4;
    for (int i = 0; i < 200; ++i) x = mobius_step(x, params);
    CHECK(x == doctest::Approx(1.0 / testsup::xi_quadratic(p, ell, lam)).epsilon(1e-13));
}

TEST_CASE("xi: constant trees match the closed form; iteration is certified") {
    for (auto [d, ell] : std::vector<std::pair<int, double>>{{3, 1.0}, {4, 1.0}, {3, 2.0}}) {
        auto env = generate(testsup::constant_config(d, ell, 64, 1));
        for (double lam : {0.05, 0.5, 2.0, 40.0}) {
            const auto est = xi(env, lam, 1e-13);
            CHECK(est.certified);
            const double closed =
                testsup::xi_quadratic(static_cast<double>(d - 1) / d, ell, lam);
            CHECK(est.xi() == doctest::Approx(closed).epsilon(1e-11));
            CHECK(est.xi() >= 1.0);
        }
    }
}

TEST_CASE("xi: degenerate line is flagged infinite") {
    auto line = generate(testsup::constant_config(2, 1.0, 64, 1));
    const auto est = xi(line, 1.0, 1e-13);
    CHECK(est.xi_infinite);
    CHECK(est.inv_xi == 0.0);
    CHECK(std::isinf(est.xi()));
    CHECK_THROWS_AS((void)xi(line, 0.0), DomainError);
    CHECK_THROWS_AS((void)xi(line, -1.0), DomainError);
}

TEST_CASE("xi: the leading 50 environment terms pin the value within the contraction bound") {
    auto env_a = generate(testsup::random_config(21, 600));
    auto degs = env_a.degrees();
    auto lens = env_a.lengths();
    const auto env_src = generate(testsup::random_config(22, 600));
    for (std::size_t i = 50; i < degs.size(); ++i) {
        degs[i] = env_src.degrees()[i];
        lens[i] = env_src.lengths()[i];
    }
    TreeEnvironment env_b(degs, lens, 22);
    const double lam = 1.0;
    const auto xa = xi(env_a, lam, 1e-14);
    const auto xb = xi(env_b, lam, 1e-14);
    double c50 = 1.0;
    for (std::size_t j = 1; j <= 50; ++j)
        c50 *= contraction_constant(matrix_params_at(env_a, j, lam));
    CHECK(std::abs(xa.inv_xi - xb.inv_xi) <= c50 * 1.5707963267948966 + 1e-13);
}

TEST_CASE("matrix products: conventions and ordering") {
    auto env = generate(testsup::random_config(5, 512));
    const auto one = matrix_product_ratio(env, 0.7, 1);
    CHECK(one.log_l == doctest::Approx(0.0)); // empty product: (L_1, R_1) = (1, 1)
    CHECK(one.log_r == doctest::Approx(0.0));
    CHECK(one.ratio == doctest::Approx(1.0));

    for (std::size_t k = 2; k <= 50; ++k) {
        const auto r = matrix_product_ratio(env, 0.7, k);
        CHECK(r.log_l > r.log_r); // L_k > R_k > 0
        CHECK(r.ratio > 0.0);
        CHECK(r.ratio < 1.0);
    }

    // Forward products: L~ > R~ > 0 and the column sum strictly increases.
    const double lam = 0.7;
    double vl = 1.0, vr = 1.0, prev_logsum = -1e300, log_scale = 0.0;
    for (std::size_t i = 1; i <= 200; ++i) {
        const auto p = matrix_params_at(env, i, lam);
        const double skew = env.skewness(static_cast<std::int64_t>(i));
        // (L~ R~) <- (L~ R~) M_i with M_i = (gamma/(2p)) [[1, zeta],[zeta t, t]]
        const double a = vl + vr * p.zeta * p.inv_gamma_sq;
        const double b = vl * p.zeta + vr * p.inv_gamma_sq;
        log_scale += std::log(p.gamma / (2.0 * skew));
        const double m = std::max(a, b);
        vl = a / m;
        vr = b / m;
        log_scale += std::log(m);
        if (i >= 2) CHECK(vl > vr);
        const double logsum = std::log(vl + vr) + log_scale;
        CHECK(logsum > prev_logsum);
        prev_logsum = logsum;
    }
}

TEST_CASE("matrix product ratio agrees with the Mobius iteration") {
    auto env = generate(testsup::random_config(5, 512));
    const auto est = xi(env, 0.9, 1e-12);
    const auto mp = matrix_product_ratio(env, 0.9, est.iterations + 1);
    CHECK(std::abs(mp.ratio - est.inv_xi) <= est.residual + 1e-11);
}

TEST_CASE("xi lower bound (non-degenerate supports) on a log-lambda grid") {
    auto env = generate(testsup::random_config(31, 4096));
    for (double lam = 1e-3; lam <= 100.0; lam *= 3.16227766017) {
        const auto est = xi(env, lam, 1e-12);
        const double s = std::sqrt(2.0 * lam);
        const double lower =
            1.0 + 0.5 * (std::exp(2.0 * 0.5 * s) - 1.0) / (std::exp(2.0 * 2.0 * s) + 1.0);
        CHECK(est.xi() >= lower);
    }
}

TEST_CASE("fixed-point invariance in distribution (two-sample KS)") {
    // law of 1/xi vs law of Phi_(zeta,gamma)(1/xi) with a fresh independent draw
    const double lam = 0.8;
    std::vector<double> sample_a, sample_b;
    RngStream fresh(99, "mobius.fresh", 0);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        sample_a.push_back(xi(generate(testsup::random_config(10000 + seed, 700)), lam, 1e-10).inv_xi);
        const double x = xi(generate(testsup::random_config(20000 + seed, 700)), lam, 1e-10).inv_xi;
        // fresh (d, l) draw from the same supports
        const int d = fresh.next_double() < 0.5 ? 3 : 4;
        const double ell = 0.5 + 1.5 * fresh.next_double();
        sample_b.push_back(mobius_step(x, matrix_params((d - 1.0) / d, ell, lam)));
    }
    CHECK(ks_two_sample_pvalue(sample_a, sample_b) > 0.01);
}
