#pragma once

// Shared fixtures and independent oracles for the test suite. Oracle code here
// must stay independent of the implementation paths it checks.

#include <cmath>
#include <cstdint>
#include <vector>

#include "skewfront/env.hpp"

namespace testsup {

inline skewfront::EnvConfig constant_config(int d, double ell, std::size_t horizon,
                                            std::uint64_t seed) {
    skewfront::EnvConfig cfg;
    cfg.degree_support = {{d, 1.0}};
    cfg.length_law = skewfront::LengthLaw::discrete({{ell, 1.0}});
    cfg.horizon = horizon;
    cfg.seed = seed;
    return cfg;
}

inline skewfront::EnvConfig random_config(std::uint64_t seed, std::size_t horizon = 2048) {
    skewfront::EnvConfig cfg;
    cfg.degree_support = {{3, 0.5}, {4, 0.5}};
    cfg.length_law = skewfront::LengthLaw::uniform(0.5, 2.0);
    cfg.horizon = horizon;
    cfg.seed = seed;
    return cfg;
}

/// Closed-form xi for the constant tree (fixed point of the Mobius map).
inline double xi_quadratic(double p, double ell, double lambda) {
    const double zeta = 2.0 * p - 1.0;
    const double g2 = std::exp(2.0 * std::sqrt(2.0 * lambda) * ell);
    const double disc = (g2 - 1.0) * (g2 - 1.0) + 4.0 * zeta * zeta * g2;
    return (std::sqrt(disc) + g2 - 1.0) / (2.0 * zeta * g2);
}

/// mu(-lambda) for the constant tree from the quadratic xi.
inline double mu_constant_closed(double p, double ell, double lambda) {
    const double s = std::sqrt(2.0 * lambda);
    const double x = xi_quadratic(p, ell, lambda);
    return -s + std::log((x - 1.0) / (x - std::exp(-2.0 * s * ell))) / ell;
}

/// eta_c for the constant tree.
inline double eta_c_closed(double p, double ell) {
    const double a = std::acos(2.0 * std::sqrt(p * (1.0 - p)));
    return 0.5 * a * a / (ell * ell);
}

/// Absorption probability at the right end for a finite birth-death chain:
/// sites 0..n, absorbing at both ends, up-probability q[i] at site i.
/// Solved exactly from the harmonic recursion (gambler's-ruin oracle).
inline double absorb_right_probability(const std::vector<double>& q, std::size_t start) {
    // h(i+1)-h(i) proportional to prod_{j<=i} (1-q_j)/q_j
    const std::size_t n = q.size() + 1;
    std::vector<double> gap(n, 1.0);
    double prod = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        prod *= (1.0 - q[i - 1]) / q[i - 1];
        gap[i] = prod;
    }
    double below = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i < start) below += gap[i];
        total += gap[i];
    }
    return below / total;
}

} // namespace testsup
