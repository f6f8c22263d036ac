#pragma once

// Per-interface quantities of the embedded dynamics: exit probabilities of the
// skew Brownian motion from (-a, b), exponential-moment weights
// J_{eta,+-1} = E[e^{eta sigma} 1{exit right/left}], and the hitting-probability
// series w_0(z_i) = sigma_i / (1 + sigma_i).
//
// J is computed by solving (1/2)u'' + eta u = 0 on each side of the interface
// with absorbing boundary data and the skew flux condition
// p u'(0+) = (1-p) u'(0-). With s = sqrt(2|eta|) this yields
//
//   eta < 0:  J_+ = p sinh(sa) / g,  J_- = (1-p) sinh(sb) / g,
//             g = [sinh(s(a+b)) + (1-2p) sinh(s(b-a))] / 2,
//   eta > 0:  same with sinh -> sin, valid below the principal eigenvalue
//             (first positive root of g), where both J diverge.
//
// At eta = 0 the weights reduce to the exit probabilities
// p_+ = a p / (b(1-p) + a p).

#include <cmath>
#include <limits>
#include <utility>

#include "skewfront/env.hpp"
#include "skewfront/errors.hpp"

namespace skewfront {

struct SkewExitKernel {
    double p; // skewness at the interface, in [1/2, 1)
    double a; // left gap
    double b; // right gap

    SkewExitKernel(double p_, double a_, double b_) : p(p_), a(a_), b(b_) {
        if (!(p >= 0.5) || !(p < 1.0)) throw ValidationError("kernel: p must lie in [1/2, 1)");
        if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("kernel: gaps must be positive");
    }
};

/// Kernel of interface i >= 1: skewness p_i between gaps (l_{i-1}, l_i).
inline SkewExitKernel kernel_at(const TreeEnvironment& env, std::size_t i) {
    if (i < 1 || i > env.horizon() - 1)
        throw DomainError("kernel_at: need 1 <= i <= horizon-1");
    return SkewExitKernel(env.skewness(static_cast<std::int64_t>(i)),
                          env.edge_length(static_cast<std::int64_t>(i) - 1),
                          env.edge_length(static_cast<std::int64_t>(i)));
}

inline std::pair<double, double> exit_probabilities(const SkewExitKernel& k) {
    const double plus = k.a * k.p / (k.b * (1.0 - k.p) + k.a * k.p);
    return {plus, 1.0 - plus};
}

namespace detail {

// g(sigma) for the trigonometric regime, without the 1/2 factor.
inline double trig_denominator(const SkewExitKernel& k, double sigma) {
    return std::sin(sigma * (k.a + k.b)) + (1.0 - 2.0 * k.p) * std::sin(sigma * (k.b - k.a));
}

} // namespace detail

/// Smallest eta > 0 at which J blows up (principal eigenvalue of the two-sided
/// absorbing problem). The first root of g lies in (pi/(2 max), pi/(2 min)].
inline double divergence_threshold(const SkewExitKernel& k) {
    const double lo0 = 1.5707963267948966 / std::max(k.a, k.b);
    const double hi0 = 1.5707963267948966 / std::min(k.a, k.b) + 1e-12;
    const int steps = 4096;
    double prev = lo0, fprev = detail::trig_denominator(k, prev);
    double lo = lo0, hi = hi0;
    bool found = false;
    for (int i = 1; i <= steps; ++i) {
        const double x = lo0 + (hi0 - lo0) * static_cast<double>(i) / steps;
        const double fx = detail::trig_denominator(k, x);
        if ((fprev > 0.0) != (fx > 0.0)) {
            lo = prev;
            hi = x;
            found = true;
            break;
        }
        prev = x;
        fprev = fx;
    }
    if (!found) throw DomainError("divergence_threshold: no sign change located");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (detail::trig_denominator(k, mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double sigma = 0.5 * (lo + hi);
    return 0.5 * sigma * sigma;
}

/// (J_+, J_-) at exponent eta; +infinity at or past the divergence threshold.
/// Pass the kernel's precomputed threshold to skip the root search in hot loops.
inline std::pair<double, double> exit_laplace(const SkewExitKernel& k, double eta,
                                              double threshold_hint = -1.0) {
    if (eta == 0.0) return exit_probabilities(k);
    if (eta < 0.0) {
        // Hyperbolic regime, written with nonpositive exponents only.
        const double s = std::sqrt(-2.0 * eta);
        const double ea = std::exp(-s * k.a), eb = std::exp(-s * k.b);
        const double eab = std::exp(-s * (k.a + k.b));
        const double den =
            1.0 - eab * eab + (1.0 - 2.0 * k.p) * (ea * ea - eb * eb);
        const double jp = 2.0 * k.p * (eb - eab * ea) / den;
        const double jm = 2.0 * (1.0 - k.p) * (ea - eab * eb) / den;
        return {jp, jm};
    }
    const double threshold = threshold_hint >= 0.0 ? threshold_hint : divergence_threshold(k);
    const double inf = std::numeric_limits<double>::infinity();
    if (eta >= threshold) return {inf, inf};
    const double sigma = std::sqrt(2.0 * eta);
    const double g = detail::trig_denominator(k, sigma);
    if (!(g > 0.0)) return {inf, inf};
    const double jp = 2.0 * k.p * std::sin(sigma * k.a) / g;
    const double jm = 2.0 * (1.0 - k.p) * std::sin(sigma * k.b) / g;
    return {jp, jm};
}

struct HitProbability {
    double value = 0.0;     // w_0(z_i)
    double sigma = 0.0;     // the series value (infinity for recurrent cases)
    bool certified = false; // tail bounded by the configured supports
};

/// w_0(z_i) = sigma_i/(1+sigma_i), sigma_i = sum_{k>=i} prod_{j<=k} r_j with
/// r_j = l_j (1-p_j) / (l_{j-1} p_j). Tail certified through the uniform bound
/// rho = (l_hi/l_lo) max_p (1-p)/p when rho < 1; otherwise summed until the
/// partial products fall below 1e-14 (estimated-only), or rejected if the
/// horizon cannot support that.
inline HitProbability hit_probability_series(const TreeEnvironment& env, std::size_t i,
                                             double tol = 1e-12) {
    if (i < 1) throw DomainError("hit_probability_series: i >= 1 required");
    if (env.is_degenerate_line()) {
        HitProbability res;
        res.value = 1.0;
        res.sigma = std::numeric_limits<double>::infinity();
        res.certified = true;
        return res;
    }
    double rho_bar = std::numeric_limits<double>::quiet_NaN();
    bool have_bound = false;
    if (env.config()) {
        const auto& cfg = *env.config();
        const double p_lo =
            static_cast<double>(cfg.min_degree() - 1) / static_cast<double>(cfg.min_degree());
        rho_bar = (cfg.length_law.max_length() / cfg.length_law.min_length()) *
                  (1.0 - p_lo) / p_lo;
        have_bound = true;
    }
    const std::size_t n = env.horizon();
    double prod = 1.0;
    double sum = 0.0;
    for (std::size_t k = 1; k + 1 <= n; ++k) {
        const auto kk = static_cast<std::int64_t>(k);
        const double r = env.edge_length(kk) * (1.0 - env.skewness(kk)) /
                         (env.edge_length(kk - 1) * env.skewness(kk));
        prod *= r;
        if (k >= i) sum += prod;
        if (have_bound && rho_bar < 1.0 && k >= i) {
            const double tail = prod * rho_bar / (1.0 - rho_bar);
            if (tail < tol * std::max(sum, 1.0)) {
                HitProbability res;
                res.sigma = sum;
                res.value = sum / (1.0 + sum);
                res.certified = true;
                return res;
            }
        }
        if (!have_bound || rho_bar >= 1.0) {
            if (k >= i && prod < 1e-14) {
                HitProbability res;
                res.sigma = sum;
                res.value = sum / (1.0 + sum);
                res.certified = false;
                return res;
            }
        }
    }
    // Horizon exhausted without certification: estimate how far we would have to go.
    const double decay = prod > 0.0 && prod < 1.0
                             ? std::log(prod) / static_cast<double>(n)
                             : 0.0;
    std::size_t required = decay < 0.0
                               ? static_cast<std::size_t>(std::ceil(std::log(1e-14) / decay))
                               : std::numeric_limits<std::size_t>::max();
    throw InsufficientHorizonError("hit_probability_series: horizon too short for truncation",
                                   required);
}

/// Sufficient condition for a positive critical exponent: max_i p^i_{+1} p^{i+1}_{-1} < 1/4 over the materialized range.
inline bool eta_c_positive_condition(const TreeEnvironment& env) {
    if (env.horizon() < 3) throw DomainError("eta_c_positive_condition: horizon too short");
    double worst = 0.0;
    for (std::size_t i = 1; i + 2 <= env.horizon(); ++i) {
        const double plus_i = exit_probabilities(kernel_at(env, i)).first;
        const double minus_next = exit_probabilities(kernel_at(env, i + 1)).second;
        worst = std::max(worst, plus_i * minus_next);
    }
    return worst < 0.25;
}

} // namespace skewfront
