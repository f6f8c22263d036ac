#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "skewfront/pde.hpp"
#include "skewfront/speed.hpp"
#include "test_support.hpp"

using namespace skewfront;

TEST_CASE("line front travels at sqrt(2 beta) and stays in [0,1]") {
    auto line = generate(testsup::constant_config(2, 1.0, 400, 2));
    PdeConfig cfg;
    cfg.beta = 2.0;
    cfg.half_width = 130.0;
    cfg.t_max = 40.0;
    cfg.dx = 0.05;
    cfg.dt = 0.01;
    cfg.snapshot_stride = 40;
    double vmin = 1.0, vmax = 0.0;
    const auto trace = solve(line, cfg, [&](const PdeField& f) {
        for (double v : *f.v) {
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    });
    CHECK(std::abs(trace.fitted_speed - 2.0) / 2.0 < 0.05);
    CHECK(trace.front_monotone);
    CHECK(vmin >= -1e-9); // maximum principle
    CHECK(vmax <= 1.0 + 1e-9);
    CHECK(std::abs(trace.fitted_speed - trace.fitted_speed_left) < 0.01);
}

TEST_CASE("constant (3,1) front matches the closed-form speed") {
    auto env = generate(testsup::constant_config(3, 1.0, 400, 1));
    PdeConfig cfg;
    cfg.beta = 5.0;
    cfg.half_width = 160.0;
    cfg.t_max = 40.0;
    cfg.dx = 0.05;
    cfg.dt = 0.004;
    const auto trace = solve(env, cfg);
    const double predicted = speed_constant_closed_form(3, 1.0, 5.0).c_star;
    CHECK(std::abs(trace.fitted_speed - predicted) / predicted < 0.07);
}

TEST_CASE("mirror symmetry is preserved to the last bit") {
    auto env = generate(testsup::random_config(3, 400));
    PdeConfig cfg;
    cfg.beta = 3.0;
    cfg.half_width = 60.0;
    cfg.t_max = 12.0;
    cfg.dx = 0.05;
    cfg.dt = 0.01;
    cfg.delta = 0.25;
    cfg.snapshot_stride = 20;
    double worst = 0.0;
    (void)solve(env, cfg, [&](const PdeField& f) {
        const auto& v = *f.v;
        for (std::size_t i = 0; i < v.size(); ++i)
            worst = std::max(worst, std::abs(v[i] - v[v.size() - 1 - i]));
    });
    CHECK(worst <= 1e-10);
}

TEST_CASE("interface flux defect is first-order in dx") {
    auto env = generate(testsup::constant_config(3, 1.0, 400, 1));
    auto defect = [&](double dx) {
        PdeConfig cfg;
        cfg.beta = 3.0;
        cfg.half_width = 45.0;
        cfg.t_max = 8.0;
        cfg.dx = dx;
        cfg.dt = 0.002;
        cfg.snapshot_stride = 1;
        double worst = 0.0;
        (void)solve(env, cfg, [&](const PdeField& f) {
            const auto& x = *f.x;
            const auto& v = *f.v;
            for (std::size_t j = 1; j + 1 < x.size(); ++j) {
                // interface nodes sit at integer positions 1..; check p g+ = (1-p) g-
                const double xi = x[j];
                if (std::abs(xi - std::round(xi)) > 1e-12 || std::abs(xi) < 0.5) continue;
                if (std::abs(xi) > 20.0) continue;
                const double p = xi > 0 ? 2.0 / 3.0 : 1.0 / 3.0;
                const double gp = (v[j + 1] - v[j]) / (x[j + 1] - x[j]);
                const double gm = (v[j] - v[j - 1]) / (x[j] - x[j - 1]);
                worst = std::max(worst, std::abs(p * gp - (1.0 - p) * gm));
            }
        });
        return worst;
    };
    const double coarse = defect(0.1);
    const double fine = defect(0.05);
    CHECK(fine < coarse);
    CHECK(fine < 0.6 * coarse + 1e-6); // roughly halves with dx
    CHECK(coarse < 1.0 * 0.1 * 10.0);  // C dx with a generous constant
}

TEST_CASE("halving dx changes the fitted speed by less than one percent") {
    auto env = generate(testsup::constant_config(3, 1.0, 400, 1));
    auto fit = [&](double dx) {
        PdeConfig cfg;
        cfg.beta = 5.0;
        cfg.half_width = 110.0;
        cfg.t_max = 26.0;
        cfg.dx = dx;
        cfg.dt = 0.004;
        return solve(env, cfg).fitted_speed;
    };
    const double coarse = fit(0.1);
    const double fine = fit(0.05);
    CHECK(std::abs(coarse - fine) / fine < 0.01);
}

TEST_CASE("domain-too-small and config validation errors") {
    auto env = generate(testsup::constant_config(3, 1.0, 400, 1));
    PdeConfig cfg;
    cfg.beta = 5.0;
    cfg.half_width = 30.0; // much too small for t_max = 40
    cfg.t_max = 40.0;
    cfg.dx = 0.05;
    cfg.dt = 0.004;
    CHECK_THROWS_AS((void)solve(env, cfg), DomainTooSmallError);

    PdeConfig bad = cfg;
    bad.half_width = 150.0;
    bad.dt = 0.5; // dt * beta > 1
    CHECK_THROWS_AS((void)solve(env, bad), ConfigError);

    PdeConfig bad2 = cfg;
    bad2.delta = 2.0; // delta >= l_min
    CHECK_THROWS_AS((void)solve(env, bad2), ConfigError);
}

TEST_CASE("field bound check trips on an invalid state") {
    CHECK_THROWS_AS(detail::check_field_bounds({0.2, 1.5, 0.1}), StabilityError);
    CHECK_THROWS_AS(detail::check_field_bounds({0.2, std::nan(""), 0.1}), StabilityError);
    CHECK_NOTHROW(detail::check_field_bounds({0.0, 0.5, 1.0}));
}

TEST_CASE("speed sweep is monotone in beta") {
    auto env = generate(testsup::constant_config(4, 1.0, 400, 1));
    PdeConfig base;
    base.half_width = 80.0;
    base.t_max = 24.0;
    base.dx = 0.05;
    base.dt = 0.01;
    const std::vector<double> betas{3.0, 6.0};
    std::vector<double> predicted;
    for (double b : betas) predicted.push_back(speed_constant_closed_form(4, 1.0, b).c_star);
    const auto rows = empirical_speed_sweep(env, betas, predicted, base);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].fitted_speed > rows[0].fitted_speed);
    for (const auto& r : rows)
        CHECK(std::abs(r.fitted_speed - r.predicted_speed) / r.predicted_speed < 0.08);
}
