#pragma once

// Direct solver for the projected FKPP equation on [-L, L] with skew interface
// conditions
//
//   v_t = (1/2) v_xx + beta v (1 - v),   p_i v_x(z_i+) = (1-p_i) v_x(z_i-),
//
// Dirichlet zero at the ends, v_0 = 1_{(-delta, delta)}. Per-edge uniform grids
// keep every interface on a node. Ghost elimination with the flux condition and
// the PDE itself gives the modified interface stencil
//
//   v_t(z_i) = f + [ p (v_{j+1}-v_j)/h_+ - (1-p)(v_j-v_{j-1})/h_- ] / (p h_+ + (1-p) h_-),
//
// first order at interfaces, second order elsewhere (p = 1/2, h_+ = h_- recovers
// the standard three-point Laplacian). Time stepping is implicit in diffusion
// (tridiagonal solve) and explicit in reaction; dt beta <= 1 keeps v in [0, 1].
// The tridiagonal solve eliminates from both ends toward the center with
// mirrored operation order, so a symmetric problem stays symmetric to the last
// bit and the left/right fronts cannot drift apart numerically.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "skewfront/env.hpp"
#include "skewfront/errors.hpp"

namespace skewfront {

struct PdeConfig {
    double half_width = 100.0;
    double dx = 0.05;
    double dt = 0.01;
    double t_max = 40.0;
    double beta = 1.0;
    double delta = 0.25;       // initial condition half-width, 0 < delta < l_min
    double front_level = 0.5;
    double fit_window = 0.4;   // trailing fraction of the post-clearing records
    double record_every = 0.1; // front sampling interval
    std::size_t snapshot_stride = 0; // records between snapshots; 0 = none

    void validate(const TreeEnvironment& env) const {
        if (!(half_width > 0.0)) throw ConfigError("pde: half_width must be positive");
        if (!(dx > 0.0) || !(dt > 0.0)) throw ConfigError("pde: dx and dt must be positive");
        if (!(beta > 0.0)) throw ConfigError("pde: beta must be positive");
        if (!(delta > 0.0) || !(delta < env.min_length()))
            throw ConfigError("pde: delta must satisfy 0 < delta < l_min");
        if (!(front_level > 0.0) || !(front_level < 1.0))
            throw ConfigError("pde: front_level must lie in (0,1)");
        if (dt * beta > 1.0 + 1e-12)
            throw ConfigError("pde: stability requires dt * beta <= 1");
        if (!(fit_window > 0.0) || !(fit_window <= 1.0))
            throw ConfigError("pde: fit_window must lie in (0,1]");
    }
};

struct FrontTrace {
    std::vector<double> times;
    std::vector<double> front_right;
    std::vector<double> front_left;
    double fitted_speed = 0.0;
    double fitted_speed_left = 0.0;
    double fit_residual = 0.0;
    bool front_monotone = true;
};

struct PdeField {
    double time = 0.0;
    const std::vector<double>* x = nullptr;
    const std::vector<double>* v = nullptr;
};

namespace detail {

struct PdeGrid {
    std::vector<double> x;       // nodes, symmetric, x[mid] = 0
    std::vector<double> skew;    // p at each node (1/2 off-interface)
    std::size_t mid = 0;
};

inline PdeGrid build_pde_grid(const TreeEnvironment& env, double half_width, double dx) {
    // positive breakpoints: interfaces below L, then L itself
    std::vector<double> brk{0.0};
    std::vector<double> brk_skew{0.5};
    for (std::size_t i = 1; i <= env.horizon(); ++i) {
        const double z = env.interface(static_cast<std::int64_t>(i));
        if (z >= half_width - 1e-12) break;
        brk.push_back(z);
        brk_skew.push_back(env.skewness(static_cast<std::int64_t>(i)));
    }
    brk.push_back(half_width);
    brk_skew.push_back(0.5);

    std::vector<double> xs{0.0};
    std::vector<double> ps{0.5};
    for (std::size_t seg = 0; seg + 1 < brk.size(); ++seg) {
        const double len = brk[seg + 1] - brk[seg];
        const auto n = std::max<std::int64_t>(1, std::llround(len / dx));
        const double h = len / static_cast<double>(n);
        for (std::int64_t k = 1; k <= n; ++k) {
            xs.push_back(brk[seg] + h * static_cast<double>(k));
            ps.push_back(k == n ? brk_skew[seg + 1] : 0.5);
        }
    }
    PdeGrid grid;
    const std::size_t pos = xs.size();
    grid.x.resize(2 * pos - 1);
    grid.skew.resize(2 * pos - 1);
    grid.mid = pos - 1;
    for (std::size_t k = 0; k < pos; ++k) {
        grid.x[grid.mid + k] = xs[k];
        grid.x[grid.mid - k] = -xs[k];
        grid.skew[grid.mid + k] = ps[k];
        grid.skew[grid.mid - k] = 1.0 - ps[k];
    }
    grid.skew[grid.mid] = 0.5;
    return grid;
}

// Tridiagonal solve by two-sided elimination meeting at the center node.
// Coefficients are constant per run, so the elimination factors are prepared
// once and each step only sweeps the right-hand side.
class CenterMeetSolver {
public:
    void prepare(const std::vector<double>& a, const std::vector<double>& b,
                 const std::vector<double>& c) {
        n_ = b.size();
        mid_ = n_ / 2;
        a_ = a;
        b_ = b;
        c_ = c;
        bl_.assign(n_, 0.0);
        br_.assign(n_, 0.0);
        fl_.assign(n_, 0.0);
        fr_.assign(n_, 0.0);
        bl_[0] = b[0];
        for (std::size_t i = 1; i < mid_; ++i) {
            fl_[i] = a[i] / bl_[i - 1];
            bl_[i] = b[i] - fl_[i] * c[i - 1];
        }
        br_[n_ - 1] = b[n_ - 1];
        for (std::size_t i = n_ - 1; i-- > mid_ + 1;) {
            fr_[i] = c[i] / br_[i + 1];
            br_[i] = b[i] - fr_[i] * a[i + 1];
        }
        const double left = a_[mid_] * c_[mid_ - 1] / bl_[mid_ - 1];
        const double right = c_[mid_] * a_[mid_ + 1] / br_[mid_ + 1];
        center_ = b_[mid_] - left - right;
    }

    void solve(std::vector<double>& r, std::vector<double>& x) const {
        for (std::size_t i = 1; i < mid_; ++i) r[i] -= fl_[i] * r[i - 1];
        for (std::size_t i = n_ - 1; i-- > mid_ + 1;) r[i] -= fr_[i] * r[i + 1];
        x[mid_] = (r[mid_] - a_[mid_] * r[mid_ - 1] / bl_[mid_ - 1] -
                   c_[mid_] * r[mid_ + 1] / br_[mid_ + 1]) /
                  center_;
        for (std::size_t i = mid_; i-- > 0;)
            x[i] = (r[i] - c_[i] * x[i + 1]) / bl_[i];
        for (std::size_t i = mid_ + 1; i < n_; ++i)
            x[i] = (r[i] - a_[i] * x[i - 1]) / br_[i];
    }

private:
    std::size_t n_ = 0, mid_ = 0;
    std::vector<double> a_, b_, c_, bl_, br_, fl_, fr_;
    double center_ = 0.0;
};

inline double front_position(const std::vector<double>& x, const std::vector<double>& v,
                             double level) {
    for (std::size_t i = v.size(); i-- > 1;) {
        if (v[i] >= level) {
            if (i + 1 == v.size()) return x[i];
            const double t = (v[i] - level) / (v[i] - v[i + 1]);
            return x[i] + t * (x[i + 1] - x[i]);
        }
    }
    return x.front();
}

inline double front_position_left(const std::vector<double>& x, const std::vector<double>& v,
                                  double level) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (v[i] >= level) {
            if (i == 0) return x[0];
            const double t = (v[i] - level) / (v[i] - v[i - 1]);
            return x[i] - t * (x[i] - x[i - 1]);
        }
    }
    return x.back();
}

inline std::pair<double, double> lsq_slope(const std::vector<double>& t,
                                           const std::vector<double>& y) {
    const double n = static_cast<double>(t.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    const double slope = (n * sty - st * sy) / (n * stt - st * st);
    const double icept = (sy - slope * st) / n;
    double rss = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double e = y[i] - slope * t[i] - icept;
        rss += e * e;
    }
    return {slope, std::sqrt(rss / n)};
}

inline void check_field_bounds(const std::vector<double>& v) {
    for (double val : v)
        if (!(val >= -1e-9) || !(val <= 1.0 + 1e-9) || !std::isfinite(val))
            throw StabilityError("pde: field left the invariant region [0, 1]");
}

} // namespace detail

/// Integrate the projected FKPP equation and track the fronts.
inline FrontTrace solve(const TreeEnvironment& env, const PdeConfig& config,
                        const std::function<void(const PdeField&)>& on_snapshot = nullptr) {
    config.validate(env);
    const auto grid = detail::build_pde_grid(env, config.half_width, config.dx);
    const std::size_t n = grid.x.size();

    // (I - dt A), with the interface-aware three-point stencil rows.
    std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0);
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double hl = grid.x[j] - grid.x[j - 1];
        const double hr = grid.x[j + 1] - grid.x[j];
        const double p = grid.skew[j];
        const double den = p * hr + (1.0 - p) * hl;
        const double al = (1.0 - p) / (hl * den);
        const double ar = p / (hr * den);
        a[j] = -config.dt * al;
        c[j] = -config.dt * ar;
        b[j] = 1.0 + config.dt * (al + ar);
    }
    detail::CenterMeetSolver solver;
    solver.prepare(a, b, c);

    std::vector<double> v(n, 0.0), rhs(n, 0.0), vnext(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        if (std::abs(grid.x[j]) < config.delta) v[j] = 1.0;

    FrontTrace trace;
    const auto n_steps = static_cast<std::size_t>(std::ceil(config.t_max / config.dt));
    const auto record_stride =
        std::max<std::size_t>(1, static_cast<std::size_t>(config.record_every / config.dt));
    const double danger = config.half_width - 5.0 * env.max_length();

    std::size_t records = 0;
    for (std::size_t step = 1; step <= n_steps; ++step) {
        for (std::size_t j = 0; j < n; ++j)
            rhs[j] = v[j] + config.dt * config.beta * v[j] * (1.0 - v[j]);
        rhs[0] = 0.0;
        rhs[n - 1] = 0.0;
        solver.solve(rhs, vnext);
        v.swap(vnext);
        if (step % record_stride == 0 || step == n_steps) {
            detail::check_field_bounds(v);
            const double t = static_cast<double>(step) * config.dt;
            const double xr = detail::front_position(grid.x, v, config.front_level);
            const double xl = detail::front_position_left(grid.x, v, config.front_level);
            trace.times.push_back(t);
            trace.front_right.push_back(xr);
            trace.front_left.push_back(xl);
            ++records;
            if (xr > danger) {
                const double speed_est = xr / t;
                throw DomainTooSmallError("pde: front reached the boundary margin",
                                          1.5 * (speed_est * config.t_max +
                                                 10.0 * env.max_length()));
            }
            if (on_snapshot && config.snapshot_stride != 0 &&
                records % config.snapshot_stride == 0) {
                PdeField field;
                field.time = t;
                field.x = &grid.x;
                field.v = &v;
                on_snapshot(field);
            }
        }
    }

    // Fit window: trailing fraction of the records after the front clears 10 l_max.
    const double clearance = 10.0 * env.max_length();
    std::size_t first_clear = trace.times.size();
    for (std::size_t i = 0; i < trace.times.size(); ++i)
        if (trace.front_right[i] >= clearance) {
            first_clear = i;
            break;
        }
    if (first_clear + 8 >= trace.times.size())
        throw DomainError("pde: front never cleared 10 l_max before t_max; increase t_max");
    const std::size_t tail_len = trace.times.size() - first_clear;
    const auto fit_begin =
        trace.times.size() - std::max<std::size_t>(4, static_cast<std::size_t>(
                                                          config.fit_window * tail_len));
    std::vector<double> ts(trace.times.begin() + fit_begin, trace.times.end());
    std::vector<double> xr(trace.front_right.begin() + fit_begin, trace.front_right.end());
    std::vector<double> xl(trace.front_left.begin() + fit_begin, trace.front_left.end());
    for (std::size_t i = 1; i < xr.size(); ++i)
        if (xr[i] < xr[i - 1] - 1e-9) trace.front_monotone = false;
    auto [slope_r, res_r] = detail::lsq_slope(ts, xr);
    for (auto& val : xl) val = -val;
    auto [slope_l, res_l] = detail::lsq_slope(ts, xl);
    trace.fitted_speed = slope_r;
    trace.fitted_speed_left = slope_l;
    trace.fit_residual = std::max(res_r, res_l);
    return trace;
}

struct SweepRow {
    double beta = 0.0;
    double fitted_speed = 0.0;
    double predicted_speed = 0.0;
};

/// Per-beta solves with auto-scaled domain and step sizes; predictions are
/// supplied by the caller (speed module) for the comparison column.
inline std::vector<SweepRow> empirical_speed_sweep(const TreeEnvironment& env,
                                                   const std::vector<double>& betas,
                                                   const std::vector<double>& predicted,
                                                   const PdeConfig& base) {
    if (betas.size() != predicted.size())
        throw DomainError("empirical_speed_sweep: betas and predictions must align");
    std::vector<SweepRow> rows;
    rows.reserve(betas.size());
    for (std::size_t i = 0; i < betas.size(); ++i) {
        PdeConfig cfg = base;
        cfg.beta = betas[i];
        cfg.dt = std::min(base.dt, 0.5 / betas[i]);
        const double c_pred = predicted[i] > 0.0 ? predicted[i] : std::sqrt(2.0 * betas[i]);
        cfg.half_width = std::max(base.half_width,
                                  1.35 * c_pred * cfg.t_max + 15.0 * env.max_length());
        const auto trace = solve(env, cfg);
        rows.push_back({betas[i], trace.fitted_speed, predicted[i]});
    }
    return rows;
}

} // namespace skewfront
