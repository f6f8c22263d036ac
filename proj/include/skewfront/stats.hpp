#pragma once

// Small statistics helpers shared by the validation suite and the CLI checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace skewfront {

struct OnlineStats {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double std_error() const { return std::sqrt(variance() / static_cast<double>(n)); }
};

/// Asymptotic Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
inline double kolmogorov_tail(double lam) {
    if (lam < 0.2) return 1.0;
    double s = 0.0, sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lam * lam);
        s += sign * term;
        sign = -sign;
        if (term < 1e-12) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

/// Two-sample Kolmogorov-Smirnov p-value (asymptotic).
inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / na;
        const double fb = static_cast<double>(j) / nb;
        d = std::max(d, std::abs(fa - fb));
    }
    const double en = std::sqrt(na * nb / (na + nb));
    return kolmogorov_tail((en + 0.12 + 0.11 / en) * d);
}

/// One-sample KS p-value against uniform(0,1) for already-transformed data.
inline double ks_uniform_pvalue(std::vector<double> u) {
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, std::abs(u[i] - lo), std::abs(u[i] - hi)});
    }
    const double en = std::sqrt(n);
    return kolmogorov_tail((en + 0.12 + 0.11 / en) * d);
}

/// Chi-square p-value with one degree of freedom.
inline double chi2_1dof_pvalue(double stat) { return std::erfc(std::sqrt(stat / 2.0)); }

} // namespace skewfront
