#pragma once

// Lyapunov exponent mu(eta) of the interface-to-interface hitting times, the
// critical exponent eta_c, and the Legendre-transform rate function I(a).
//
// For eta = -lambda < 0,
//   mu(-lambda) = -sqrt(2 lambda)
//                 + (1/E l) E[ ln( (xi_lambda - 1) / (xi_lambda - e^{-2 sqrt(2 lambda) l_0}) ) ],
// evaluated as an ergodic average over a long environment window. One backward
// Mobius sweep yields bracketed values of 1/xi for every shifted environment, so
// the whole window costs a single pass. mu(0) comes from the hitting-probability
// series by the same windowing, which makes finite differences of
// mu(0) - mu(-lambda) cancel the quenched noise exactly.
//
// eta_c is the root of Theta_eta = 1, where Theta is the growth rate of the
// height-indexed path partition function with weights J_{eta,+-1}; the partition
// function is evaluated by a transfer recursion and the k-truncation bias
// (a Catalan-type polynomial prefactor) is removed by Richardson extrapolation
// of successive partition-function ratios.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "skewfront/env.hpp"
#include "skewfront/errors.hpp"
#include "skewfront/kernel.hpp"
#include "skewfront/mobius.hpp"

namespace skewfront {

struct MuOptions {
    std::size_t window = 0;   // 0: auto (short for constant environments)
    double orbit_tol = 1e-13; // certification target for the 1/xi brackets
};

namespace detail {

inline std::size_t mu_window(const TreeEnvironment& env, const MuOptions& opts) {
    if (opts.window != 0) return opts.window;
    // Constant trees have identical terms; lines have exactly zero log terms.
    if (env.is_constant() || env.is_degenerate_line()) return 2048;
    return 100000;
}

struct SweepSums {
    double sum_ln = 0.0;
    double sum_len = 0.0;
    bool certified = false;
};

// Ergodic average of ln((1 - x_i)/(1 - t0_i x_i)) over interfaces i = 1..window,
// where x_i brackets 1/xi of the environment shifted to interface i and
// t0_i = e^{-2 s l_{i-1}}.
inline SweepSums mu_log_sweep(const TreeEnvironment& env, double lambda, std::size_t window,
                              double orbit_tol) {
    const double s = std::sqrt(2.0 * lambda);
    std::size_t headroom = 512;
    const std::size_t headroom_cap = 1u << 18;
    TreeEnvironment work = env;
    for (;;) {
        std::size_t total = window + headroom;
        if (work.horizon() < total + 1) {
            if (work.config()) {
                work = extended(work, total + 1);
            } else {
                total = work.horizon() - 1;
                if (total <= window) window = total > 1 ? total - 1 : 1;
            }
        }
        double lo = 0.0, hi = 1.0;
        SweepSums out;
        bool spread_ok = false;
        for (std::size_t j = total; j >= 1; --j) {
            const auto p = matrix_params_at(work, j, lambda);
            lo = mobius_step(lo, p);
            hi = mobius_step(hi, p);
            if (j == window) spread_ok = (hi - lo) <= orbit_tol;
            if (j <= window) {
                const double x = 0.5 * (lo + hi);
                const double len = work.edge_length(static_cast<std::int64_t>(j) - 1);
                const double t0 = std::exp(-2.0 * s * len);
                out.sum_ln += std::log1p(-x) - std::log1p(-t0 * x);
                out.sum_len += len;
            }
        }
        out.certified = spread_ok;
        if (spread_ok || headroom >= headroom_cap || !work.config()) return out;
        headroom *= 4;
    }
}

// Per-interface hit probabilities w_j = P(hit z_j from z_{j+1}) for j = 0..window-1,
// bracketed through the S-recursion S_j = r_{j+1} (1 + S_{j+1}).
struct HitSweep {
    std::vector<double> w; // w[j], j = 0..window-1
    bool certified = false;
};

inline HitSweep hit_probability_sweep(const TreeEnvironment& env, std::size_t window,
                                      double orbit_tol = 1e-13) {
    std::size_t headroom = 512;
    const std::size_t headroom_cap = 1u << 18;
    TreeEnvironment work = env;
    for (;;) {
        std::size_t total = window + headroom;
        if (work.horizon() < total + 2) {
            if (work.config()) {
                work = extended(work, total + 2);
            } else {
                total = work.horizon() - 2;
                if (total <= window) window = total > 1 ? total - 1 : 1;
            }
        }
        double tail_hi = 1e12;
        bool have_bound = false;
        if (work.config()) {
            const auto& cfg = *work.config();
            const double p_lo = static_cast<double>(cfg.min_degree() - 1) /
                                static_cast<double>(cfg.min_degree());
            const double rho = (cfg.length_law.max_length() / cfg.length_law.min_length()) *
                               (1.0 - p_lo) / p_lo;
            if (rho < 1.0) {
                tail_hi = rho / (1.0 - rho);
                have_bound = true;
            }
        }
        double s_lo = 0.0, s_hi = tail_hi;
        HitSweep out;
        out.w.assign(window, 0.0);
        bool spread_ok = false;
        for (std::size_t j = total; j-- > 0;) {
            const auto m = static_cast<std::int64_t>(j) + 1;
            const double r = work.edge_length(m) * (1.0 - work.skewness(m)) /
                             (work.edge_length(m - 1) * work.skewness(m));
            s_lo = r * (1.0 + s_lo);
            s_hi = r * (1.0 + s_hi);
            if (j == window - 1) {
                const double spread = s_hi / (1.0 + s_hi) - s_lo / (1.0 + s_lo);
                spread_ok = have_bound ? spread <= orbit_tol : spread <= 10 * orbit_tol;
            }
            if (j < window) {
                const double sj = 0.5 * (s_lo + s_hi);
                out.w[j] = sj / (1.0 + sj);
            }
        }
        out.certified = spread_ok && have_bound;
        if (spread_ok || headroom >= headroom_cap || !work.config()) return out;
        headroom *= 4;
    }
}

} // namespace detail

struct MuValue {
    double value = 0.0;
    bool certified = false;
};

/// mu(-lambda) for lambda > 0.
inline MuValue mu_negative_full(const TreeEnvironment& env, double lambda,
                                const MuOptions& opts = {}) {
    if (!(lambda > 0.0)) throw DomainError("mu_negative: lambda must be positive");
    const std::size_t window = detail::mu_window(env, opts);
    const auto sums = detail::mu_log_sweep(env, lambda, window, opts.orbit_tol);
    MuValue out;
    out.value = -std::sqrt(2.0 * lambda) + sums.sum_ln / sums.sum_len;
    out.certified = sums.certified;
    return out;
}

inline double mu_negative(const TreeEnvironment& env, double lambda, const MuOptions& opts = {}) {
    return mu_negative_full(env, lambda, opts).value;
}

/// w_lambda(l_0) = e^{-s l_0} (xi - 1)/(xi - e^{-2 s l_0}), the Laplace transform
/// of the hitting time of the origin from z_1.
inline double w_laplace(const TreeEnvironment& env, double lambda, double xi_tol = 1e-12) {
    if (!(lambda > 0.0)) throw DomainError("w_laplace: lambda must be positive");
    const double s = std::sqrt(2.0 * lambda);
    const double l0 = env.edge_length(0);
    const double x = xi(env, lambda, xi_tol).inv_xi;
    const double t0 = std::exp(-2.0 * s * l0);
    return std::exp(-s * l0) * (1.0 - x) / (1.0 - t0 * x);
}

struct MuZeroPrime {
    double mu0 = 0.0;
    double mu_prime0 = 0.0;
    bool prime_infinite = false;
    bool certified = false;
};

/// mu(0) from the hitting-probability series and mu'(0) by Richardson-extrapolated
/// one-sided finite differences from the lambda > 0 side.
inline MuZeroPrime mu_zero_and_prime(const TreeEnvironment& env, const MuOptions& opts = {}) {
    MuZeroPrime out;
    if (env.is_degenerate_line()) {
        out.mu0 = 0.0;
        out.mu_prime0 = std::numeric_limits<double>::infinity();
        out.prime_infinite = true;
        out.certified = true;
        return out;
    }
    const std::size_t window = detail::mu_window(env, opts);
    const auto hits = detail::hit_probability_sweep(env, window, opts.orbit_tol);
    const TreeEnvironment work = env.config() && env.horizon() < hits.w.size()
                                     ? extended(env, hits.w.size())
                                     : env;
    double sum_ln = 0.0, sum_len = 0.0;
    for (std::size_t j = 0; j < hits.w.size(); ++j) {
        sum_ln += std::log(hits.w[j]);
        sum_len += work.edge_length(static_cast<std::int64_t>(j));
    }
    out.mu0 = sum_ln / sum_len;

    // One-sided finite differences D(h) = (mu0 - mu(-h))/h, Richardson tableau in h.
    MuOptions fd_opts = opts;
    fd_opts.window = hits.w.size();
    bool fd_certified = true;
    auto D = [&](double h) {
        const auto m = mu_negative_full(env, h, fd_opts);
        fd_certified = fd_certified && m.certified;
        return (out.mu0 - m.value) / h;
    };
    constexpr int kMaxLevel = 7;
    double tableau[kMaxLevel][kMaxLevel];
    double h = 1e-3;
    double prev_diag = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k < kMaxLevel; ++k, h *= 0.5) {
        tableau[k][0] = D(h);
        double pow2 = 2.0;
        for (int m = 1; m <= k; ++m, pow2 *= 2.0) {
            tableau[k][m] = (pow2 * tableau[k][m - 1] - tableau[k - 1][m - 1]) / (pow2 - 1.0);
        }
        const double diag = tableau[k][k];
        if (k >= 2 && std::abs(diag - prev_diag) < 1e-4 * std::abs(diag)) {
            out.mu_prime0 = diag;
            out.certified = hits.certified && fd_certified;
            return out;
        }
        prev_diag = diag;
    }
    out.mu_prime0 = prev_diag;
    out.certified = false;
    return out;
}

struct EtaC {
    double estimate = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t k_used = 0;
    bool eta_c_positive = false;
};

struct EtaCOptions {
    std::size_t k_start = 512;
    std::size_t k_max = 8192;
    double eta_tol = 5e-4;
};

namespace detail {

// ln Z_{0,2k} for k = K/2-1, K/2, K-1, K from one transfer recursion, combined
// into a Richardson-in-1/k estimate of Theta_eta.
//
// The recursion runs on the Jacobi-symmetrized operator: edge h <-> h+1 carries
// weight sqrt(J^h_{+1} J^{h+1}_{-1}) in both directions, which is a similarity
// transform fixing height 1, so Z is unchanged while the exponential altitude
// tilt (J+/J-)^{h/2} disappears from the iterates. Mass then spreads
// diffusively, so heights are capped at O(sqrt(K)) with an e^{-O(1)} tail.
inline double theta_hat(const std::vector<double>& jp, const std::vector<double>& jm,
                        std::size_t K, std::size_t hmax) {
    std::vector<double> w(hmax + 1, 0.0); // w[h]: edge h <-> h+1
    for (std::size_t h = 1; h <= hmax; ++h) w[h] = std::sqrt(jp[h] * jm[h + 1]);
    std::vector<double> cur(hmax + 2, 0.0), nxt(hmax + 2, 0.0);
    cur[1] = 1.0;
    double log_scale = 0.0;
    double ln_z[4] = {0, 0, 0, 0}; // k = K/2-1, K/2, K-1, K
    for (std::size_t step = 1; step <= 2 * K; ++step) {
        const std::size_t top = std::min(hmax, 1 + step);
        double mx = 0.0;
        for (std::size_t hgt = 1; hgt <= top; ++hgt) {
            double v = cur[hgt + 1] * w[hgt];
            if (hgt >= 2) v += cur[hgt - 1] * w[hgt - 1];
            nxt[hgt] = v;
            mx = std::max(mx, v);
        }
        if (!(mx > 0.0) || !std::isfinite(mx))
            return std::numeric_limits<double>::infinity();
        for (std::size_t hgt = 1; hgt <= top; ++hgt) nxt[hgt] /= mx;
        for (std::size_t hgt = top + 1; hgt <= hmax + 1; ++hgt) nxt[hgt] = 0.0;
        log_scale += std::log(mx);
        cur.swap(nxt);
        if (step % 2 == 0) {
            const std::size_t k = step / 2;
            if (k == K / 2 - 1) ln_z[0] = std::log(cur[1]) + log_scale;
            if (k == K / 2) ln_z[1] = std::log(cur[1]) + log_scale;
            if (k == K - 1) ln_z[2] = std::log(cur[1]) + log_scale;
            if (k == K) ln_z[3] = std::log(cur[1]) + log_scale;
        }
    }
    for (double lz : ln_z)
        // cur[1] underflow means the recursion localized on a near-divergent
        // edge whose gain dwarfs the return amplitude: deep supercritical.
        if (!std::isfinite(lz)) return std::numeric_limits<double>::infinity();
    const double rho_full = std::exp(ln_z[3] - ln_z[2]);
    const double rho_half = std::exp(ln_z[1] - ln_z[0]);
    return 2.0 * rho_full - rho_half;
}

} // namespace detail

/// Critical exponent via bisection of Theta_eta = 1, k doubled until the root
/// stabilizes.
inline EtaC eta_c_estimate(const TreeEnvironment& env, const EtaCOptions& opts = {}) {
    EtaC out;
    // Heights the capped transfer recursion can reach at the largest K.
    const auto height_need = [](std::size_t K) {
        return std::min<std::size_t>(
                   K + 1,
                   static_cast<std::size_t>(6.0 * std::sqrt(2.0 * static_cast<double>(K))) + 12) +
               2;
    };
    const std::size_t horizon_need = height_need(opts.k_max) + 2;
    TreeEnvironment work = env.config() && env.horizon() < horizon_need
                               ? extended(env, horizon_need)
                               : env;
    // The recursion depth K is limited by the horizon only through the heights
    // it can materialize, ~6 sqrt(2K).
    std::size_t k_cap = opts.k_max;
    if (!work.config()) {
        while (k_cap > 16 && height_need(k_cap) + 2 > work.horizon()) k_cap /= 2;
    }
    if (k_cap < 16 || work.horizon() < 20)
        throw InsufficientHorizonError("eta_c_estimate: horizon too short", 64);
    out.eta_c_positive = eta_c_positive_condition(work);

    // Cached kernels and divergence thresholds for the reachable heights.
    const std::size_t h_top = std::min<std::size_t>(height_need(k_cap), work.horizon() - 1);
    std::vector<SkewExitKernel> kernels;
    std::vector<double> thresholds;
    kernels.reserve(h_top);
    thresholds.reserve(h_top);
    const bool constant_env = work.is_constant();
    double const_threshold = -1.0;
    for (std::size_t h = 1; h <= h_top; ++h) {
        kernels.push_back(kernel_at(work, h));
        if (constant_env) {
            if (const_threshold < 0.0) const_threshold = divergence_threshold(kernels.back());
            thresholds.push_back(const_threshold);
        } else {
            thresholds.push_back(divergence_threshold(kernels.back()));
        }
    }
    auto theta_at = [&](double eta, std::size_t K) {
        const std::size_t need = std::min<std::size_t>(height_need(K), h_top);
        std::vector<double> jp(need + 1, 0.0), jm(need + 1, 0.0);
        for (std::size_t h = 1; h <= need; ++h) {
            const auto j = exit_laplace(kernels[h - 1], eta, thresholds[h - 1]);
            jp[h] = j.first;
            jm[h] = j.second;
            if (!std::isfinite(jp[h])) return std::numeric_limits<double>::infinity();
        }
        return detail::theta_hat(jp, jm, K, need - 2);
    };
    // Upper bracket: at the smallest reachable kernel threshold one J weight is
    // infinite, so the path sum and Theta are too; eta_c lies strictly below.
    auto eta_sup_at = [&](std::size_t K) {
        const std::size_t need = std::min<std::size_t>(height_need(K), h_top);
        return *std::min_element(thresholds.begin(),
                                 thresholds.begin() + static_cast<std::ptrdiff_t>(need));
    };

    double prev_root = std::numeric_limits<double>::quiet_NaN();
    const std::size_t k_begin = std::max<std::size_t>(16, std::min(opts.k_start, k_cap));
    for (std::size_t K = k_begin; K <= k_cap; K *= 2) {
        if (theta_at(0.0, K) >= 1.0 - 2e-4) {
            out.estimate = 0.0;
            out.lo = 0.0;
            out.hi = opts.eta_tol;
            out.k_used = K;
            return out;
        }
        double lo = 0.0, hi = eta_sup_at(K);
        if (!(theta_at(hi, K) > 1.0))
            throw DomainError("eta_c_estimate: failed to bracket the root below the divergence threshold");
        while (hi - lo > 0.5 * opts.eta_tol) {
            const double mid = 0.5 * (lo + hi);
            if (theta_at(mid, K) < 1.0)
                lo = mid;
            else
                hi = mid;
        }
        const double root = 0.5 * (lo + hi);
        out.estimate = root;
        out.lo = lo;
        out.hi = hi;
        out.k_used = K;
        if (!std::isnan(prev_root) && std::abs(root - prev_root) < opts.eta_tol) {
            out.lo = std::min(lo, prev_root) - 0.5 * opts.eta_tol;
            out.hi = std::max(hi, prev_root) + 0.5 * opts.eta_tol;
            out.lo = std::max(out.lo, 0.0);
            return out;
        }
        prev_root = root;
        if (K * 2 > k_cap) break;
    }
    // k exhausted without stabilization: report the widest honest bracket.
    out.lo = std::max(0.0, out.estimate - 4 * opts.eta_tol);
    out.hi = out.estimate + 4 * opts.eta_tol;
    return out;
}

struct LyapunovCurve {
    std::vector<double> lambda_grid;
    std::vector<double> mu_values; // mu(-lambda) per grid point
    double mu0 = 0.0;
    double mu_prime0 = 0.0;
    bool mu_prime_infinite = false;
    EtaC eta_c;
    std::string env_digest;
};

inline LyapunovCurve build_lyapunov_curve(const TreeEnvironment& env,
                                          const std::vector<double>& lambda_grid,
                                          const MuOptions& opts = {},
                                          const EtaCOptions& eta_opts = {}) {
    LyapunovCurve curve;
    curve.lambda_grid = lambda_grid;
    curve.mu_values.reserve(lambda_grid.size());
    for (double lam : lambda_grid) curve.mu_values.push_back(mu_negative(env, lam, opts));
    const auto mz = mu_zero_and_prime(env, opts);
    curve.mu0 = mz.mu0;
    curve.mu_prime0 = mz.mu_prime0;
    curve.mu_prime_infinite = mz.prime_infinite;
    curve.eta_c = env.is_degenerate_line() ? EtaC{} : eta_c_estimate(env, eta_opts);
    curve.env_digest = env.digest();
    return curve;
}

/// Legendre data: I(a) = sup_{eta <= 0} (a eta - mu(eta)) for a in (0, mu'(0)].
class RateFunction {
public:
    RateFunction(TreeEnvironment env, double mu0, double mu_prime0, double lambda_max,
                 MuOptions opts = {})
        : env_(std::move(env)), mu0_(mu0), mu_prime0_(mu_prime0), lambda_max_(lambda_max),
          opts_(opts) {}

    /// |mu(-lambda)|, memoized; lambda = 0 uses mu(0).
    double mu_abs(double lambda) const {
        if (lambda <= 0.0) return -mu0_;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(lambda);
            if (it != cache_.end()) return it->second;
        }
        const double v = -mu_negative(env_, lambda, opts_);
        std::lock_guard<std::mutex> lock(mutex_);
        cache_.emplace(lambda, v);
        return v;
    }

    struct Value {
        double rate = 0.0;
        double eta_star = 0.0;
    };

    /// Golden-section maximization of |mu(-lambda)| - a lambda over [0, lambda_max].
    Value rate(double a) const {
        if (!(a > 0.0)) throw DomainError("rate: a must be positive");
        if (a > mu_prime0_ * (1.0 + 1e-9))
            throw DomainError("rate: a exceeds mu'(0); only a in (0, mu'(0)] is supported");
        const auto g = [&](double lam) { return mu_abs(lam) - a * lam; };
        // Coarse bracket, then golden section on the concave objective.
        const int coarse = 40;
        double best_lam = 0.0, best_val = g(0.0);
        for (int i = 1; i <= coarse; ++i) {
            const double lam = lambda_max_ * std::pow(static_cast<double>(i) / coarse, 2.0);
            const double v = g(lam);
            if (v > best_val) {
                best_val = v;
                best_lam = lam;
            }
        }
        double lo = std::max(0.0, best_lam - lambda_max_ * 0.1);
        double hi = std::min(lambda_max_, best_lam + lambda_max_ * 0.1);
        const double gr = 0.6180339887498949;
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = g(x1), f2 = g(x2);
        for (int it = 0; it < 120 && (hi - lo) > 1e-12 * (1.0 + hi); ++it) {
            if (f1 < f2) {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = g(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = g(x1);
            }
        }
        const double lam_star = 0.5 * (lo + hi);
        Value out;
        out.rate = g(lam_star);
        out.eta_star = -lam_star;
        // The maximizer can sit at the left endpoint (a near mu'(0)).
        const double at_zero = g(0.0);
        if (at_zero >= out.rate) {
            out.rate = at_zero;
            out.eta_star = 0.0;
        }
        return out;
    }

    double mu0() const { return mu0_; }
    double mu_prime0() const { return mu_prime0_; }
    double lambda_max() const { return lambda_max_; }

private:
    TreeEnvironment env_;
    double mu0_;
    double mu_prime0_;
    double lambda_max_;
    MuOptions opts_;
    mutable std::map<double, double> cache_;
    mutable std::mutex mutex_;
};

} // namespace skewfront
