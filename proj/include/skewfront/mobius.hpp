#pragma once

// The limit ratio xi_lambda of the interface matrix products, computed through
// iterated random Mobius transforms.
//
// With gamma_i = e^{sqrt(2 lambda) l_i} and zeta_i = 2 p_i - 1, the column sums
// (L_k, R_k) = (1, 1) M_{k-1} ... M_1 satisfy R_{k+1}/L_{k+1} = Phi_1 o ... o
// Phi_k(1), where Phi_{(zeta,gamma)}(x) = (zeta gamma^2 + x)/(gamma^2 + zeta x).
// The backward composition converges a.s.; 1/xi is its limit in [0, 1].
//
// All arithmetic uses t = gamma^{-2} = e^{-2 sqrt(2 lambda) l} so nothing
// overflows for large lambda. Convergence certificates come from running two
// orbits with extreme seeds: every deeper composition is squeezed between them
// because each Phi is increasing, so the orbit spread bounds |x_K - x_inf|.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "skewfront/env.hpp"
#include "skewfront/errors.hpp"

namespace skewfront {

struct InterfaceMatrixParams {
    double gamma;        // e^{sqrt(2 lambda) l_i} > 1 for lambda > 0
    double zeta;         // 2 p_i - 1 in [0, 1)
    double inv_gamma_sq; // e^{-2 sqrt(2 lambda) l_i}, the stable parametrization
};

inline InterfaceMatrixParams matrix_params(double skewness, double edge_length, double lambda) {
    const double s = std::sqrt(2.0 * lambda);
    InterfaceMatrixParams p;
    p.gamma = std::exp(s * edge_length);
    p.zeta = 2.0 * skewness - 1.0;
    p.inv_gamma_sq = std::exp(-2.0 * s * edge_length);
    return p;
}

/// Params of interface i >= 1: uses (p_i, l_i).
inline InterfaceMatrixParams matrix_params_at(const TreeEnvironment& env, std::size_t i,
                                              double lambda) {
    return matrix_params(env.skewness(static_cast<std::int64_t>(i)),
                         env.edge_length(static_cast<std::int64_t>(i)), lambda);
}

/// Phi_{(zeta,gamma)}(x) = (zeta gamma^2 + x) / (gamma^2 + zeta x), maps [0,1] into [0,1).
inline double mobius_step(double x, const InterfaceMatrixParams& p) {
    const double t = p.inv_gamma_sq;
    return (p.zeta + x * t) / (1.0 + p.zeta * x * t);
}

/// Per-map Lipschitz constant on the arctan metric over [0, pi/4].
inline double contraction_constant(const InterfaceMatrixParams& p) {
    const double t = p.inv_gamma_sq;
    const double z2 = p.zeta * p.zeta;
    const double k1 = (1.0 - z2) * t / (1.0 + z2);
    const double k2 = 2.0 * (1.0 - z2) * t / ((1.0 + z2) * (1.0 + t * t) + 4.0 * p.zeta * t);
    return std::max(k1, k2);
}

struct XiEstimate {
    double lambda = 0.0;
    double inv_xi = 0.0;            // primary value, in [0, 1]
    std::size_t iterations = 0;     // composition depth used
    double contraction_bound = 1.0; // product of per-map constants
    double residual = 0.0;          // orbit spread at stop; bounds |inv_xi - limit|
    bool certified = false;
    bool xi_infinite = false;

    double xi() const {
        return xi_infinite ? std::numeric_limits<double>::infinity() : 1.0 / inv_xi;
    }
};

/// Backward Mobius iteration for 1/xi_lambda.
inline XiEstimate xi(const TreeEnvironment& env, double lambda, double tol = 1e-12) {
    if (!(lambda > 0.0)) throw DomainError("xi: lambda must be positive");
    if (!env.config() && env.horizon() < 2)
        throw DomainError("xi: environment horizon too short and not extendable");

    XiEstimate est;
    est.lambda = lambda;

    std::size_t depth = 256;
    const std::size_t depth_cap = 1u << 21;
    TreeEnvironment work = env;
    for (;;) {
        // matrix_params_at(j) reads edge l_j, so depth j needs horizon >= j + 1
        if (work.horizon() < depth + 1) {
            if (work.config())
                work = extended(work, depth + 1);
            else
                depth = work.horizon() - 1; // loaded env: use what is materialized
        }
        double lo = 0.0, hi = 1.0, cbound = 1.0;
        for (std::size_t j = depth; j >= 1; --j) {
            const auto p = matrix_params_at(work, j, lambda);
            lo = mobius_step(lo, p);
            hi = mobius_step(hi, p);
            cbound *= contraction_constant(p);
            if (cbound < 1e-300) cbound = 1e-300;
        }
        const double spread = hi - lo;
        est.iterations = depth;
        est.contraction_bound = cbound;
        est.residual = spread;
        est.inv_xi = 0.5 * (lo + hi);
        est.certified = spread <= tol;
        if (est.certified || depth >= depth_cap) break;
        if (!work.config() && depth + 1 >= work.horizon()) break;
        depth *= 2;
    }
    if (est.inv_xi < 1e-300) {
        est.inv_xi = 0.0;
        est.xi_infinite = true;
    }
    return est;
}

struct MatrixProductRatio {
    double log_l = 0.0;  // ln L_k
    double log_r = 0.0;  // ln R_k
    double ratio = 1.0;  // R_k / L_k in [0, 1]
};

/// (1 1) M_{k-1} ... M_1 evaluated with per-step renormalization.
/// Independent code path against the Mobius iteration: same composition,
/// explicit matrix arithmetic in log scale.
inline MatrixProductRatio matrix_product_ratio(const TreeEnvironment& env, double lambda,
                                               std::size_t k) {
    if (!(lambda > 0.0)) throw DomainError("matrix_product_ratio: lambda must be positive");
    if (k > env.horizon()) throw DomainError("matrix_product_ratio: k exceeds horizon");
    double vl = 1.0, vr = 1.0, log_scale = 0.0;
    // M_i = (gamma_i / (2 p_i)) [[1, zeta],[zeta t, t]] with t = gamma^{-2}.
    for (std::size_t i = k; i-- > 1;) {
        const auto p = matrix_params_at(env, i, lambda);
        const double t = p.inv_gamma_sq;
        const double skew = env.skewness(static_cast<std::int64_t>(i));
        const double a = vl + vr * p.zeta * t;
        const double b = vl * p.zeta + vr * t;
        log_scale += std::log(p.gamma / (2.0 * skew));
        const double m = std::max(a, b);
        vl = a / m;
        vr = b / m;
        log_scale += std::log(m);
    }
    MatrixProductRatio out;
    out.log_l = std::log(vl) + log_scale;
    out.log_r = std::log(vr) + log_scale;
    out.ratio = vr / vl;
    return out;
}

} // namespace skewfront
