#pragma once

// Exact samplers for the two first-passage laws that the embedded-walk simulator
// is built from:
//
//   (1) tau = exit time of standard Brownian motion from (-1, 1) started at 0,
//   (2) T   = first passage of a Bessel(3) process from x in (0, 1) to 1
//       (equivalently: Brownian interval-exit time conditioned on the exit side).
//
// Both distribution functions have a rapidly convergent series on either side of
// a crossover: a reflection/image series for small t and an eigenfunction series
// for large t. Sampling is by inversion: bracketed bisection plus Newton polish
// against the exact CDF, so each sample is a deterministic function of one
// uniform draw.

#include <array>
#include <cmath>

#include "skewfront/rng.hpp"

namespace skewfront {
namespace exit_times {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kCrossover = 0.25;

/// Upper-tail standard normal via erfc.
inline double normal_sf(double x) { return 0.5 * std::erfc(x * 0.7071067811865475244); }

// ---------------------------------------------------------------------------
// (1) Brownian exit from (-1, 1), started at 0.
// ---------------------------------------------------------------------------

/// P(tau <= t).
inline double interval_exit_cdf(double t) {
    if (t <= 0.0) return 0.0;
    if (t < kCrossover) {
        // 4 * sum_j (-1)^j Phi_bar((2j+1)/sqrt(t))
        const double r = 1.0 / std::sqrt(t);
        double s = 0.0, sign = 1.0;
        for (int j = 0; j < 8; ++j) {
            const double term = normal_sf((2.0 * j + 1.0) * r);
            s += sign * term;
            sign = -sign;
            if (term < 1e-20) break;
        }
        return 4.0 * s;
    }
    // 1 - (4/pi) * sum_j (-1)^j/(2j+1) exp(-(2j+1)^2 pi^2 t / 8)
    double s = 0.0, sign = 1.0;
    for (int j = 0; j < 16; ++j) {
        const double m = 2.0 * j + 1.0;
        const double term = std::exp(-m * m * kPi * kPi * t / 8.0) / m;
        s += sign * term;
        sign = -sign;
        if (term < 1e-18) break;
    }
    return 1.0 - (4.0 / kPi) * s;
}

/// Density of tau.
inline double interval_exit_pdf(double t) {
    if (t <= 0.0) return 0.0;
    if (t < kCrossover) {
        const double r = 1.0 / std::sqrt(t);
        const double c = 0.3989422804014326779; // 1/sqrt(2 pi)
        double s = 0.0, sign = 1.0;
        for (int j = 0; j < 8; ++j) {
            const double m = 2.0 * j + 1.0;
            const double z = m * r;
            s += sign * m * c * std::exp(-0.5 * z * z);
            sign = -sign;
        }
        return 2.0 * s / (t * std::sqrt(t));
    }
    double s = 0.0, sign = 1.0;
    for (int j = 0; j < 16; ++j) {
        const double m = 2.0 * j + 1.0;
        const double term = m * std::exp(-m * m * kPi * kPi * t / 8.0);
        s += sign * term;
        sign = -sign;
        if (term < 1e-18) break;
    }
    return (kPi / 2.0) * s;
}

namespace detail {

inline double invert_cdf(double u, double lo, double hi, double (*cdf)(double),
                         double (*pdf)(double)) {
    // Bisection to localize, then safeguarded Newton.
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < u)
            lo = mid;
        else
            hi = mid;
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {
        const double f = cdf(t) - u;
        const double d = pdf(t);
        if (!(d > 0.0)) break;
        double step = f / d;
        double next = t - step;
        if (next <= lo || next >= hi) break;
        t = next;
        if (std::abs(step) < 1e-14 * (1.0 + t)) break;
    }
    return t;
}

struct IntervalExitTable {
    static constexpr int kSize = 2048;
    std::array<double, kSize + 1> q{};
    IntervalExitTable() {
        for (int i = 0; i <= kSize; ++i) {
            const double u = (i + 0.5) / (kSize + 1.0);
            q[i] = invert_cdf(u, 1e-3, 80.0, &interval_exit_cdf, &interval_exit_pdf);
        }
    }
};

inline const IntervalExitTable& interval_exit_table() {
    static const IntervalExitTable table;
    return table;
}

} // namespace detail

/// Quantile function of tau.
inline double interval_exit_quantile(double u) {
    const auto& table = detail::interval_exit_table();
    const double pos = u * (detail::IntervalExitTable::kSize + 1.0) - 0.5;
    const int idx = static_cast<int>(pos);
    double lo = 1e-3, hi = 80.0;
    if (idx >= 1) lo = table.q[idx - 1];
    if (idx + 1 <= detail::IntervalExitTable::kSize) hi = table.q[idx + 1];
    if (!(hi > lo)) {
        lo = 1e-3;
        hi = 80.0;
    }
    // Table brackets the true quantile; a short bisection-Newton finishes it.
    for (int it = 0; it < 12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (interval_exit_cdf(mid) < u)
            lo = mid;
        else
            hi = mid;
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        const double d = interval_exit_pdf(t);
        if (!(d > 0.0)) break;
        const double next = t - (interval_exit_cdf(t) - u) / d;
        if (next <= lo || next >= hi) break;
        t = next;
    }
    return t;
}

/// Sample tau (unit half-width); scale by m^2 for the interval (-m, m).
inline double sample_interval_exit(RngStream& rng) {
    return interval_exit_quantile(rng.next_open() * (1.0 - 1e-16));
}

// ---------------------------------------------------------------------------
// (2) Bessel(3) first passage from x in (0,1) to 1.
// ---------------------------------------------------------------------------

/// P(T <= t) for BES(3) started at x, absorbed at 1.
inline double bes3_fpt_cdf(double x, double t) {
    if (t <= 0.0) return 0.0;
    if (t < kCrossover) {
        const double r = 1.0 / std::sqrt(2.0 * t);
        double s = 0.0;
        for (int k = 0; k < 8; ++k) {
            const double c = 2.0 * k + 1.0;
            const double term = std::erfc((c - x) * r) - std::erfc((c + x) * r);
            s += term;
            if (term < 1e-20) break;
        }
        return s / x;
    }
    double s = 0.0, sign = 1.0;
    for (int k = 1; k <= 24; ++k) {
        const double envelope = std::exp(-k * k * kPi * kPi * t / 2.0);
        s += sign * std::sin(k * kPi * x) / k * envelope;
        sign = -sign;
        if (envelope < 1e-18) break;
    }
    return 1.0 - (2.0 / (kPi * x)) * s;
}

/// Density of T.
inline double bes3_fpt_pdf(double x, double t) {
    if (t <= 0.0) return 0.0;
    if (t < kCrossover) {
        const double c0 = 0.3989422804014326779;
        double s = 0.0;
        for (int k = 0; k < 8; ++k) {
            const double c = 2.0 * k + 1.0;
            const double zm = (c - x) / std::sqrt(t);
            const double zp = (c + x) / std::sqrt(t);
            s += (c - x) * c0 * std::exp(-0.5 * zm * zm) - (c + x) * c0 * std::exp(-0.5 * zp * zp);
        }
        return s / (x * t * std::sqrt(t));
    }
    double s = 0.0, sign = 1.0;
    for (int k = 1; k <= 24; ++k) {
        const double envelope = std::exp(-k * k * kPi * kPi * t / 2.0);
        s += sign * k * std::sin(k * kPi * x) * envelope;
        sign = -sign;
        if (k * envelope < 1e-18) break;
    }
    return (kPi / x) * s;
}

/// Quantile of T by inversion.
inline double bes3_fpt_quantile(double x, double u) {
    double lo = 1e-12, hi = 40.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (bes3_fpt_cdf(x, mid) < u)
            lo = mid;
        else
            hi = mid;
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 6; ++it) {
        const double d = bes3_fpt_pdf(x, t);
        if (!(d > 0.0)) break;
        const double next = t - (bes3_fpt_cdf(x, t) - u) / d;
        if (next <= lo || next >= hi) break;
        t = next;
    }
    return t;
}

/// Sample T for BES(3) from x in (0, 1) to 1; scale by L^2 for barrier L.
inline double sample_bes3_fpt(double x, RngStream& rng) {
    return bes3_fpt_quantile(x, rng.next_open() * (1.0 - 1e-16));
}

} // namespace exit_times
} // namespace skewfront
