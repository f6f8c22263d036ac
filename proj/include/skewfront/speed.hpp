#pragma once

// Wave speed c* = inf_{lambda >= 0} (lambda + beta)/|mu(-lambda)| and the
// critical reaction rate beta_c = max(eta_c, -mu(0)/mu'(0)).
//
// The generic route evaluates |mu(-lambda)| through the Mobius/Lyapunov pipeline.
// The constant-(d,l) tree has an independent closed-form route where xi solves a
// quadratic; both are exposed so they can cross-check each other.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "skewfront/env.hpp"
#include "skewfront/errors.hpp"
#include "skewfront/lyapunov.hpp"

namespace skewfront {

struct SpeedResult {
    double beta = 0.0;
    double c_star = 0.0;
    double lambda_star = 0.0;
    double beta_c = 0.0;
    bool assumption_ok = false;
    std::string assumption_status; // "ok" | "violated" | "uncertain"
    std::string method;            // "variational" | "constant_closed_form" | "degenerate_line"
    double eta_c_lo = 0.0;
    double eta_c_hi = 0.0;
};

namespace detail {

struct Minimum {
    double arg = 0.0;
    double value = 0.0;
    bool unimodal = true;
};

// Coarse scan for unimodality, then golden section around the global minimum.
inline Minimum minimize_on_lambda(const std::function<double(double)>& f, double lambda_max) {
    std::vector<double> grid;
    grid.push_back(0.0);
    const int n_coarse = 64;
    for (int i = 1; i <= n_coarse; ++i)
        grid.push_back(lambda_max * std::pow(static_cast<double>(i) / n_coarse, 2.0));
    std::vector<double> vals(grid.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        vals[i] = f(grid[i]);
        if (vals[i] < vals[best]) best = i;
    }
    Minimum out;
    int minima = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const bool left_ok = i == 0 || vals[i] <= vals[i - 1] + 1e-12 * std::abs(vals[i]);
        const bool right_ok =
            i + 1 == grid.size() || vals[i] <= vals[i + 1] + 1e-12 * std::abs(vals[i]);
        if (left_ok && right_ok && (i == 0 || vals[i] < vals[i - 1]) &&
            (i + 1 == grid.size() || vals[i] < vals[i + 1]))
            ++minima;
    }
    out.unimodal = minima <= 1;
    if (!out.unimodal) {
        // Fall back to a denser scan before refining around the global minimum.
        std::vector<double> fine;
        for (int i = 0; i <= 1024; ++i)
            fine.push_back(lambda_max * std::pow(static_cast<double>(i) / 1024.0, 2.0));
        for (double lam : fine) {
            const double v = f(lam);
            if (v < vals[best]) {
                grid.push_back(lam);
                vals.push_back(v);
                best = grid.size() - 1;
            }
        }
    }
    double lo = best > 0 ? grid[best - 1] : 0.0;
    double hi = best + 1 < grid.size() ? grid[best + 1] : lambda_max;
    if (out.unimodal) {
        lo = best > 0 ? grid[best - 1] : 0.0;
        hi = best + 1 < grid.size() ? grid[best + 1] : lambda_max;
    } else {
        lo = std::max(0.0, grid[best] - lambda_max / 64.0);
        hi = std::min(lambda_max, grid[best] + lambda_max / 64.0);
    }
    const double gr = 0.6180339887498949;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 140 && (hi - lo) > 1e-13 * (1.0 + hi); ++it) {
        if (f1 > f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = f(x1);
        }
    }
    out.arg = 0.5 * (lo + hi);
    out.value = f(out.arg);
    // Endpoint can win when the objective is monotone on [0, lambda_max].
    const double v0 = f(0.0);
    if (v0 < out.value) {
        out.arg = 0.0;
        out.value = v0;
    }
    return out;
}

inline void classify_assumption(SpeedResult& r, double beta, double beta_c_lo, double beta_c_hi) {
    if (beta > beta_c_hi) {
        r.assumption_ok = true;
        r.assumption_status = "ok";
    } else if (beta <= beta_c_lo) {
        r.assumption_ok = false;
        r.assumption_status = "violated";
    } else {
        r.assumption_ok = false;
        r.assumption_status = "uncertain";
    }
}

} // namespace detail

/// beta_c = max(eta_c, -mu(0)/mu'(0)); zero for the degenerate line.
inline double beta_c_value(const MuZeroPrime& mz, const EtaC& etac) {
    const double ratio = mz.prime_infinite ? 0.0 : -mz.mu0 / mz.mu_prime0;
    return std::max(etac.estimate, ratio);
}

inline double beta_c(const TreeEnvironment& env, const LyapunovCurve& curve) {
    MuZeroPrime mz;
    mz.mu0 = curve.mu0;
    mz.mu_prime0 = curve.mu_prime0;
    mz.prime_infinite = curve.mu_prime_infinite;
    return beta_c_value(mz, curve.eta_c);
}

struct SpeedOptions {
    MuOptions mu;
    EtaCOptions eta;
    double lambda_max = 0.0; // 0: max(10 beta, 100)
};

/// Generic variational speed through the Mobius/Lyapunov pipeline, with
/// precomputed mu(0), mu'(0), eta_c.
inline SpeedResult speed_variational(const TreeEnvironment& env, double beta,
                                     const MuZeroPrime& mz, const EtaC& etac,
                                     const SpeedOptions& opts = {}) {
    if (!(beta > 0.0)) throw DomainError("speed_variational: beta must be positive");
    const double lambda_max = opts.lambda_max > 0.0 ? opts.lambda_max : std::max(10.0 * beta, 100.0);
    auto abs_mu = [&](double lam) {
        if (lam <= 0.0) return -mz.mu0;
        return -mu_negative(env, lam, opts.mu);
    };
    auto objective = [&](double lam) {
        const double den = abs_mu(lam);
        if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
        return (lam + beta) / den;
    };
    const auto minimum = detail::minimize_on_lambda(objective, lambda_max);

    SpeedResult r;
    r.beta = beta;
    r.c_star = minimum.value;
    r.lambda_star = minimum.arg;
    r.method = "variational";
    const double ratio = mz.prime_infinite ? 0.0 : -mz.mu0 / mz.mu_prime0;
    r.beta_c = std::max(etac.estimate, ratio);
    r.eta_c_lo = etac.lo;
    r.eta_c_hi = etac.hi;
    detail::classify_assumption(r, beta, std::max(etac.lo, ratio), std::max(etac.hi, ratio));
    return r;
}

/// Convenience overload computing the assumption data itself.
inline SpeedResult speed_variational(const TreeEnvironment& env, double beta,
                                     const SpeedOptions& opts = {}) {
    const auto mz = mu_zero_and_prime(env, opts.mu);
    const EtaC etac = env.is_degenerate_line() ? EtaC{} : eta_c_estimate(env, opts.eta);
    return speed_variational(env, beta, mz, etac, opts);
}

/// Closed-form constant-(d, l) route:
///   |mu(-lambda)| = sqrt(2 lambda)
///     + (1/l) ln( p (1 + t + sqrt((1-t)^2 + 4 zeta^2 t)) / (1 - zeta^2) ),
/// with t = e^{-2 l sqrt(2 lambda)}; algebraically identical to the published
/// 4p / (1 + gamma^2 - sqrt(...)) form but stable for large lambda.
inline SpeedResult speed_constant_closed_form(int d, double ell, double beta) {
    if (!(beta > 0.0)) throw DomainError("speed_constant_closed_form: beta must be positive");
    if (!(ell > 0.0)) throw DomainError("speed_constant_closed_form: ell must be positive");
    if (d < 2) throw DomainError("speed_constant_closed_form: d must be >= 2");
    SpeedResult r;
    r.beta = beta;
    if (d == 2) {
        r.c_star = std::sqrt(2.0 * beta);
        r.lambda_star = beta;
        r.beta_c = 0.0;
        r.method = "degenerate_line";
        r.assumption_ok = true;
        r.assumption_status = "ok";
        return r;
    }
    const double p = static_cast<double>(d - 1) / static_cast<double>(d);
    const double zeta = 2.0 * p - 1.0;
    auto abs_mu = [&](double lam) {
        if (lam <= 0.0) return std::log(p / (1.0 - p)) / ell;
        const double s = std::sqrt(2.0 * lam);
        const double t = std::exp(-2.0 * s * ell);
        const double root = std::sqrt((1.0 - t) * (1.0 - t) + 4.0 * zeta * zeta * t);
        return s + std::log(p * (1.0 + t + root) / (1.0 - zeta * zeta)) / ell;
    };
    auto objective = [&](double lam) { return (lam + beta) / abs_mu(lam); };
    const auto minimum = detail::minimize_on_lambda(objective, std::max(10.0 * beta, 100.0));
    r.c_star = minimum.value;
    r.lambda_star = minimum.arg;
    // beta_c = -mu(0)/mu'(0) = (2p-1)/l^2 ln(p/(1-p)); exceeds eta_c on constant trees.
    r.beta_c = zeta * std::log(p / (1.0 - p)) / (ell * ell);
    r.method = "constant_closed_form";
    detail::classify_assumption(r, beta, r.beta_c, r.beta_c);
    return r;
}

struct EnvBounds {
    int d_max = 2;
    double ell_lo = 1.0;
    double ell_hi = 1.0;
};

namespace detail {

inline double softplus(double u) {
    // ln(1 + e^u), overflow-safe.
    if (u > 40.0) return u;
    return std::log1p(std::exp(u));
}

} // namespace detail

/// Upper bound on sqrt(2 beta) - c* from the environment bounds alone.
inline double slowdown_bound(const EnvBounds& bounds, double beta) {
    if (!(beta > 0.0)) throw DomainError("slowdown_bound: beta must be positive");
    if (bounds.d_max < 2 || !(bounds.ell_lo > 0.0) || !(bounds.ell_lo <= bounds.ell_hi))
        throw DomainError("slowdown_bound: invalid environment bounds");
    const double ln_a = std::log(0.5 * bounds.d_max) +
                        2.0 * std::sqrt(2.0 * std::sqrt(2.0 * beta)) * bounds.ell_hi;
    auto log_term = [&](double lam) {
        if (lam <= 0.0) {
            // (e^{4 s lhi} - 1)/(e^{2 s llo} - 1) -> 2 lhi / llo as s -> 0
            const double q = std::exp(ln_a) * 2.0 * bounds.ell_hi / bounds.ell_lo;
            return std::log1p(q);
        }
        const double s = std::sqrt(2.0 * lam);
        const double num = 4.0 * s * bounds.ell_hi;
        const double den = 2.0 * s * bounds.ell_lo;
        // ln(1 + A (e^num - 1)/(e^den - 1)) without overflow.
        const double ln_q = ln_a + num + std::log1p(-std::exp(-num)) -
                            (den + std::log1p(-std::exp(-den)));
        return detail::softplus(ln_q);
    };
    auto objective = [&](double lam) {
        const double den = (lam > 0.0 ? std::sqrt(2.0 * lam) : 0.0) + log_term(lam) / bounds.ell_lo;
        return (lam + beta) / den;
    };
    const auto minimum = detail::minimize_on_lambda(objective, std::max(10.0 * beta, 100.0));
    return std::sqrt(2.0 * beta) - minimum.value;
}

} // namespace skewfront
