#pragma once

// Monte Carlo simulation of the multi-skewed Brownian motion.
//
// Two simulators:
//
//  (A) Exact embedded walk. Interface positions are exact; the joint law of
//      (exit side, exit time) at each interface is sampled exactly through the
//      excursion decomposition of skew Brownian motion: with m = min(a, b), the
//      process first reaches +-m at a Brownian interval-exit time, picks the
//      sign + with probability p (independent of that time), and on the wider
//      side continues as plain Brownian motion whose one-sided exit times are
//      Bessel(3) first passages. Strong Markov composition of these pieces
//      reproduces the exit kernel without ever referencing its closed form,
//      which is what makes this an independent oracle for the kernel module.
//
//  (B) Lattice walk. Per-edge lattices aligned so every interface is a lattice
//      point; the one-step law at an interface is the exact two-point exit law
//      of the continuous process, so the embedded skeleton is exact and only
//      the clock (deterministic mean increments) is first-order.
//
// Trajectories get pre-assigned counter-based substreams and results are
// reduced chunkwise, so estimates are bit-identical for any --threads value.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "skewfront/env.hpp"
#include "skewfront/errors.hpp"
#include "skewfront/exit_times.hpp"
#include "skewfront/kernel.hpp"
#include "skewfront/parallel.hpp"
#include "skewfront/rng.hpp"

namespace skewfront {

struct WalkState {
    std::int64_t interface_index = 0;
    double clock = 0.0;
    std::uint64_t rng_stream = 0;
};

struct LocalGeometry {
    double p = 0.5;       // skewness at the interface
    double left_gap = 1;  // distance to the next interface on the left
    double right_gap = 1; // distance to the next interface on the right
};

/// Geometry around interface i (signed); negative indices by the mirror symmetry.
inline LocalGeometry local_geometry(const TreeEnvironment& env, std::int64_t i) {
    const std::int64_t n = static_cast<std::int64_t>(env.horizon());
    if (std::llabs(i) > n - 1) throw DomainError("local_geometry: index beyond horizon");
    LocalGeometry g;
    g.p = env.skewness(i);
    g.left_gap = env.edge_length(i - 1);
    g.right_gap = env.edge_length(i);
    return g;
}

/// Exact (side, time) draw for skew Brownian motion started at the interface of
/// (-a, b) with skewness p. Side is +1 (exit at b) or -1 (exit at -a).
inline std::pair<int, double> sample_skew_exit(double p, double a, double b, RngStream& rng) {
    double t = 0.0;
    const double m = std::min(a, b);
    for (;;) {
        t += m * m * exit_times::sample_interval_exit(rng);
        if (rng.next_bernoulli(p)) {
            if (b <= m) return {+1, t};
            if (rng.next_bernoulli(m / b)) {
                t += b * b * exit_times::sample_bes3_fpt(m / b, rng);
                return {+1, t};
            }
            t += b * b * exit_times::sample_bes3_fpt((b - m) / b, rng);
        } else {
            if (a <= m) return {-1, t};
            if (rng.next_bernoulli(m / a)) {
                t += a * a * exit_times::sample_bes3_fpt(m / a, rng);
                return {-1, t};
            }
            t += a * a * exit_times::sample_bes3_fpt((a - m) / a, rng);
        }
    }
}

/// One step of the embedded walk: moves to a neighbor interface and advances the
/// clock by the sampled conditional exit time.
inline WalkState embedded_walk_step(WalkState state, const TreeEnvironment& env, RngStream& rng) {
    const auto g = local_geometry(env, state.interface_index);
    const auto [side, dt] = sample_skew_exit(g.p, g.left_gap, g.right_gap, rng);
    state.interface_index += side;
    state.clock += dt;
    return state;
}

struct HittingTimeEstimate {
    double estimate = 0.0;   // mean of e^{-lambda T} (0 weight for non-hits)
    double std_error = 0.0;
    double p_hit = 0.0;
    double capped_fraction = 0.0;
    bool flagged = false; // some paths hit the step cap without a certificate
};

struct McOptions {
    std::uint64_t seed = 1;
    unsigned threads = 0;          // 0: hardware
    double weight_floor = 1e-12;   // lambda > 0: prune once e^{-lambda t} drops below
    double escape_prob = 1e-6;     // lambda = 0: certify escape at this return probability
    std::size_t max_steps = 1u << 22;
    std::string stream_label = "mc.hit";
};

namespace detail {

// Exact return probability from interface `idx` to `target` (idx > target),
// the product of per-interface downward hit probabilities.
inline std::vector<double> downward_hit_probabilities(const TreeEnvironment& env,
                                                      std::int64_t target, std::int64_t top) {
    // probs[k] = P(hit z_{target+k} from z_{target+k+1}), k = 0..top-target-1
    std::vector<double> probs;
    const std::int64_t count = top - target;
    probs.reserve(static_cast<std::size_t>(count));
    // S recursion from the deep end of the materialized environment.
    const std::int64_t n = static_cast<std::int64_t>(env.horizon());
    const std::int64_t deep = n - 2;
    double s = 0.0;
    std::vector<double> w(static_cast<std::size_t>(deep + 1), 1.0);
    for (std::int64_t j = deep; j >= 0; --j) {
        const std::int64_t m = j + 1;
        const double r = env.edge_length(m) * (1.0 - env.skewness(m)) /
                         (env.edge_length(m - 1) * env.skewness(m));
        s = r * (1.0 + s);
        w[static_cast<std::size_t>(j)] = s / (1.0 + s);
    }
    for (std::int64_t k = 0; k < count; ++k) {
        const std::int64_t j = target + k;
        if (j >= 0 && j <= deep)
            probs.push_back(w[static_cast<std::size_t>(j)]);
        else if (j < 0)
            // mirrored side: moving toward the origin is the favored direction
            probs.push_back(1.0);
        else
            probs.push_back(w.back());
    }
    return probs;
}

struct ChunkAccum {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t capped = 0;
};

} // namespace detail

/// Monte Carlo estimate of E[e^{-lambda T} 1{T < infinity}] for the hitting time
/// of z_to from z_from. For lambda > 0 paths are killed by weight, never
/// censored; for lambda = 0 transient paths are certified escaped through the
/// sigma-series bound.
inline HittingTimeEstimate hitting_time_laplace_mc(const TreeEnvironment& env_in,
                                                   std::int64_t from, std::int64_t to,
                                                   double lambda, std::size_t n_paths,
                                                   const McOptions& opts = {}) {
    if (lambda < 0.0) throw DomainError("hitting_time_laplace_mc: lambda must be >= 0");
    if (from == to) throw DomainError("hitting_time_laplace_mc: trivial hitting problem");

    // Materialize enough environment to cover the pruning time budget; paths
    // that still reach the boundary are counted as capped.
    TreeEnvironment env = env_in;
    if (env.config()) {
        const double t_cut = lambda > 0.0 ? -std::log(opts.weight_floor) / lambda : 0.0;
        const double lmin = env.min_length();
        const auto needed = static_cast<std::size_t>(
            std::llabs(from) + std::llabs(to) + 64 +
            static_cast<std::int64_t>(t_cut / std::max(0.25 * lmin * lmin, 1e-6)));
        if (env.horizon() < needed) env = extended(env, needed);
    }

    // Escape barrier for unweighted runs in the transient (downward) direction.
    std::int64_t escape_barrier = std::numeric_limits<std::int64_t>::max();
    if (lambda == 0.0 && from > to) {
        const auto probs = detail::downward_hit_probabilities(
            env, to, static_cast<std::int64_t>(env.horizon()) - 2);
        double ret = 1.0;
        std::int64_t idx = to;
        for (double p : probs) {
            ret *= p;
            ++idx;
            if (idx > from && ret < opts.escape_prob) break;
        }
        if (idx > from && ret < opts.escape_prob)
            escape_barrier = idx;
        // else: recurrent-looking environment; rely on the step cap and flag.
    }
    const double ln_floor = std::log(opts.weight_floor);
    const std::int64_t edge = static_cast<std::int64_t>(env.horizon()) - 1;

    const unsigned threads = opts.threads == 0 ? default_thread_count() : opts.threads;
    constexpr std::size_t chunk = 8192;
    const std::size_t n_chunks = (n_paths + chunk - 1) / chunk;
    std::vector<detail::ChunkAccum> acc(n_chunks);

    for_each_chunk(n_paths, chunk, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        detail::ChunkAccum a;
        for (std::size_t path = begin; path < end; ++path) {
            RngStream rng(opts.seed, opts.stream_label, path);
            std::int64_t pos = from;
            double clock = 0.0;
            bool hit = false, capped = false;
            for (std::size_t step = 0; step < opts.max_steps; ++step) {
                const auto g = local_geometry(env, pos);
                const auto [side, dt] = sample_skew_exit(g.p, g.left_gap, g.right_gap, rng);
                pos += side;
                clock += dt;
                if (pos == to) {
                    hit = true;
                    break;
                }
                if (lambda > 0.0 && -lambda * clock < ln_floor) break; // weight dead
                if (lambda == 0.0 && pos >= escape_barrier) break;     // certified escape
                if (std::llabs(pos) >= edge) {
                    capped = true;
                    break;
                }
                if (step + 1 == opts.max_steps) capped = true;
            }
            const double w = hit ? std::exp(-lambda * clock) : 0.0;
            a.sum += w;
            a.sum_sq += w * w;
            a.hits += hit ? 1 : 0;
            a.capped += capped ? 1 : 0;
        }
        acc[c] = a;
    });

    detail::ChunkAccum total;
    for (const auto& a : acc) {
        total.sum += a.sum;
        total.sum_sq += a.sum_sq;
        total.hits += a.hits;
        total.capped += a.capped;
    }
    HittingTimeEstimate out;
    const double n = static_cast<double>(n_paths);
    out.estimate = total.sum / n;
    const double var = std::max(0.0, (total.sum_sq - total.sum * total.sum / n) / (n - 1.0));
    out.std_error = std::sqrt(var / n);
    out.p_hit = static_cast<double>(total.hits) / n;
    out.capped_fraction = static_cast<double>(total.capped) / n;
    out.flagged = total.capped > 0;
    if (out.flagged) out.std_error += out.capped_fraction; // widened error bar
    return out;
}

// ---------------------------------------------------------------------------
// Lattice simulator (B).
// ---------------------------------------------------------------------------

struct LatticeSimConfig {
    double step = 0.125; // target spacing h; per-edge spacing is l_i / round(l_i / h)
    double t_max = 100.0;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

struct DriftEstimate {
    double speed = 0.0;
    double std_error = 0.0;
    bool rho_warning = false; // E[rho] >= 1 precondition failed
};

namespace detail {

struct Lattice {
    std::vector<double> x;          // site positions, symmetric around 0
    std::vector<double> p_right;    // one-step right probability
    std::vector<double> dt;         // mean holding time per step
    std::size_t origin = 0;
};

inline Lattice build_lattice(const TreeEnvironment& env, double h, std::int64_t k_interfaces) {
    Lattice lat;
    // positive side sites, edge by edge; interfaces exactly on-lattice
    std::vector<double> xs{0.0};
    std::vector<bool> is_interface{true};
    std::vector<std::int64_t> iface_index{0};
    for (std::int64_t i = 0; i < k_interfaces; ++i) {
        const double len = env.edge_length(i);
        const auto n = std::max<std::int64_t>(1, std::llround(len / h));
        const double hi = len / static_cast<double>(n);
        for (std::int64_t k = 1; k <= n; ++k) {
            xs.push_back(env.interface(i) + hi * static_cast<double>(k));
            is_interface.push_back(k == n);
            iface_index.push_back(k == n ? i + 1 : 0);
        }
    }
    // mirror to the negative side
    const std::size_t pos_count = xs.size();
    lat.x.resize(2 * pos_count - 1);
    lat.p_right.assign(lat.x.size(), 0.5);
    lat.dt.assign(lat.x.size(), 0.0);
    lat.origin = pos_count - 1;
    for (std::size_t k = 0; k < pos_count; ++k) {
        lat.x[lat.origin + k] = xs[k];
        lat.x[lat.origin - k] = -xs[k];
    }
    for (std::size_t s = 1; s + 1 < lat.x.size(); ++s) {
        const double hl = lat.x[s] - lat.x[s - 1];
        const double hr = lat.x[s + 1] - lat.x[s];
        double p = 0.5;
        const std::size_t k = s >= lat.origin ? s - lat.origin : lat.origin - s;
        if (k < pos_count && is_interface[k]) {
            const std::int64_t idx = s >= lat.origin ? iface_index[k] : -iface_index[k];
            p = env.skewness(idx);
        }
        // exact two-point exit law and mean exit time of the continuous process
        lat.p_right[s] = p * hl / ((1.0 - p) * hr + p * hl);
        lat.dt[s] = hl * hr * ((1.0 - p) * hl + p * hr) / ((1.0 - p) * hr + p * hl);
    }
    return lat;
}

} // namespace detail

/// Law-of-large-numbers drift Y_{t_max}/t_max from the lattice simulator.
inline DriftEstimate lln_drift(const TreeEnvironment& env, const LatticeSimConfig& cfg,
                               std::int64_t start_interface = 0) {
    if (!(cfg.step > 0.0)) throw DomainError("lln_drift: step must be positive");
    if (cfg.step > env.min_length() / 8.0 + 1e-12)
        throw ConfigError("lln_drift: step must satisfy h <= l_min/8");
    // generous materialized range: |Y| <= t escapes are unphysical at unit diffusivity
    const double reach = 1.2 * cfg.t_max + 12.0 * std::sqrt(cfg.t_max) + 10.0;
    const auto k_needed = static_cast<std::size_t>(reach / env.min_length()) + 2 +
                          static_cast<std::size_t>(std::llabs(start_interface));
    TreeEnvironment work = env.config() && env.horizon() < k_needed ? extended(env, k_needed) : env;
    const auto k_use = std::min<std::int64_t>(static_cast<std::int64_t>(work.horizon()) - 1,
                                              static_cast<std::int64_t>(k_needed));
    const auto lat = detail::build_lattice(work, cfg.step, k_use);

    std::size_t start_site = lat.origin;
    {
        const double target = work.interface(start_interface);
        for (std::size_t s = 0; s < lat.x.size(); ++s)
            if (std::abs(lat.x[s] - target) < 1e-9) start_site = s;
    }

    double rho_mean = 0.0;
    for (std::size_t i = 1; i + 1 <= work.horizon(); ++i) {
        const auto pr = exit_probabilities(kernel_at(work, i));
        rho_mean += pr.second / pr.first;
    }
    rho_mean /= static_cast<double>(work.horizon() - 1);

    const unsigned threads = cfg.threads == 0 ? default_thread_count() : cfg.threads;
    constexpr std::size_t chunk = 256;
    const std::size_t n_chunks = (cfg.n_paths + chunk - 1) / chunk;
    std::vector<detail::ChunkAccum> acc(n_chunks);
    for_each_chunk(cfg.n_paths, chunk, threads,
                   [&](std::size_t c, std::size_t begin, std::size_t end) {
                       detail::ChunkAccum a;
                       for (std::size_t path = begin; path < end; ++path) {
                           RngStream rng(cfg.seed, "mc.drift", path);
                           std::size_t s = start_site;
                           double clock = 0.0;
                           while (clock < cfg.t_max && s > 0 && s + 1 < lat.x.size()) {
                               clock += lat.dt[s];
                               if (rng.next_bernoulli(lat.p_right[s]))
                                   ++s;
                               else
                                   --s;
                           }
                           const double v = (lat.x[s] - lat.x[start_site]) / cfg.t_max;
                           a.sum += v;
                           a.sum_sq += v * v;
                       }
                       acc[c] = a;
                   });
    detail::ChunkAccum total;
    for (const auto& a : acc) {
        total.sum += a.sum;
        total.sum_sq += a.sum_sq;
    }
    DriftEstimate out;
    const double n = static_cast<double>(cfg.n_paths);
    out.speed = total.sum / n;
    const double var = std::max(0.0, (total.sum_sq - total.sum * total.sum / n) / (n - 1.0));
    out.std_error = std::sqrt(var / n);
    out.rho_warning = rho_mean >= 1.0;
    return out;
}

// ---------------------------------------------------------------------------
// Desk-scale check of the Lyapunov-exponent identity.
// ---------------------------------------------------------------------------

struct LdpTrendRow {
    double t = 0.0;
    double value = 0.0; // (1/((v-c)t)) ln E[e^{-lambda T_{ct}^{vt}}]
    double std_error = 0.0;
    bool flagged = false;
};

namespace detail {

struct FactorEstimate {
    double mean = 0.0;
    double se = 0.0;
    bool ok = false;
};

// E[e^{-lambda T}] for one downward interface hop z_{k+1} -> z_k.
inline FactorEstimate hop_factor(const TreeEnvironment& env, std::int64_t k, double lambda,
                                 std::size_t n_paths, const McOptions& opts) {
    McOptions o = opts;
    o.stream_label = "mc.ldp.hop." + std::to_string(k);
    const auto est = hitting_time_laplace_mc(env, k + 1, k, lambda, n_paths, o);
    FactorEstimate f;
    f.mean = est.estimate;
    f.se = est.std_error;
    f.ok = est.estimate > 0.0;
    return f;
}

// Weighted walk from `from` down to `to`; returns true on hit and accumulates
// the clock. Paths whose weight falls below the floor count as misses.
inline bool walk_down_weighted(const TreeEnvironment& env, std::int64_t from, std::int64_t to,
                               double lambda, double ln_floor, std::size_t max_steps,
                               RngStream& rng, double& clock) {
    std::int64_t pos = from;
    const std::int64_t edge = static_cast<std::int64_t>(env.horizon()) - 1;
    for (std::size_t step = 0; step < max_steps; ++step) {
        const auto g = local_geometry(env, pos);
        const auto [side, dt] = sample_skew_exit(g.p, g.left_gap, g.right_gap, rng);
        pos += side;
        clock += dt;
        if (pos == to) return true;
        if (-lambda * clock < ln_floor) return false;
        if (std::llabs(pos) >= edge) return false;
    }
    return false;
}

template <typename PathFn>
inline FactorEstimate mc_factor(std::size_t n_paths, const McOptions& opts,
                                const std::string& label, PathFn&& one_path) {
    const unsigned threads = opts.threads == 0 ? default_thread_count() : opts.threads;
    constexpr std::size_t chunk = 8192;
    const std::size_t n_chunks = (n_paths + chunk - 1) / chunk;
    std::vector<ChunkAccum> acc(n_chunks);
    for_each_chunk(n_paths, chunk, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        ChunkAccum a;
        for (std::size_t path = begin; path < end; ++path) {
            RngStream rng(opts.seed, label, path);
            const double w = one_path(rng);
            a.sum += w;
            a.sum_sq += w * w;
        }
        acc[c] = a;
    });
    ChunkAccum total;
    for (const auto& a : acc) {
        total.sum += a.sum;
        total.sum_sq += a.sum_sq;
    }
    FactorEstimate f;
    const double n = static_cast<double>(n_paths);
    f.mean = total.sum / n;
    const double var = std::max(0.0, (total.sum_sq - total.sum * total.sum / n) / (n - 1.0));
    f.se = std::sqrt(var / n);
    f.ok = f.mean > 0.0;
    return f;
}

// From an interior point x in (z_j, z_{j+1}) down to z_j. The first move is a
// plain Brownian interval exit (conditional times are Bessel(3) passages); an
// upward exit continues as an ordinary weighted walk back down.
inline FactorEstimate mc_partial_from_interior(const TreeEnvironment& env, double x,
                                               std::int64_t j, double lambda,
                                               std::size_t n_paths, const McOptions& opts) {
    const double width = env.edge_length(j);
    const double x0 = x - env.interface(j);
    const double ln_floor = std::log(opts.weight_floor);
    return mc_factor(n_paths, opts, "mc.ldp.ptop." + std::to_string(j), [&](RngStream& rng) {
        double clock = 0.0;
        if (rng.next_bernoulli(x0 / width)) {
            clock += width * width * exit_times::sample_bes3_fpt(x0 / width, rng);
            if (!walk_down_weighted(env, j + 1, j, lambda, ln_floor, opts.max_steps, rng, clock))
                return 0.0;
        } else {
            clock += width * width * exit_times::sample_bes3_fpt((width - x0) / width, rng);
        }
        return std::exp(-lambda * clock);
    });
}

// From z_j down to an interior level x in (z_{j-1}, z_j). The step at z_j uses
// the kernel truncated to (x, z_{j+1}); an upward exit walks back to z_j first.
inline FactorEstimate mc_partial_to_interior(const TreeEnvironment& env, std::int64_t j, double x,
                                             std::size_t n_paths, double lambda,
                                             const McOptions& opts) {
    const double a_trunc = env.interface(j) - x;
    const double b_gap = env.edge_length(j);
    const double p = env.skewness(j);
    const double ln_floor = std::log(opts.weight_floor);
    return mc_factor(n_paths, opts, "mc.ldp.pbot." + std::to_string(j), [&](RngStream& rng) {
        double clock = 0.0;
        for (;;) {
            const auto [side, dt] = sample_skew_exit(p, a_trunc, b_gap, rng);
            clock += dt;
            if (side < 0) return std::exp(-lambda * clock);
            if (-lambda * clock < ln_floor) return 0.0;
            if (!walk_down_weighted(env, j + 1, j, lambda, ln_floor, opts.max_steps, rng, clock))
                return 0.0;
        }
    });
}

} // namespace detail

/// Telescoped Monte Carlo estimate of the Lyapunov identity quantity. The
/// expectation factorizes exactly over downward interface hops (strong Markov),
/// so each factor is estimated by paths and the logs are summed; hop estimates
/// are shared between rows. Partial edges at misaligned endpoints contribute
/// conditioned first-step factors.
inline std::vector<LdpTrendRow> ldp_trend(const TreeEnvironment& env, double c, double v,
                                          double lambda, const std::vector<double>& t_grid,
                                          std::size_t n_paths, const McOptions& opts = {}) {
    if (!(0.0 < c && c < v)) throw DomainError("ldp_trend: need 0 < c < v");
    if (!(lambda > 0.0)) throw DomainError("ldp_trend: lambda must be positive");
    double t_max_needed = 0.0;
    for (double t : t_grid) t_max_needed = std::max(t_max_needed, t);
    // cover v*t plus the drift reach of weight-pruned excursions above it
    const double t_cut = -std::log(opts.weight_floor) / lambda;
    const double reach = v * t_max_needed + 1.0 +
                         t_cut / std::max(0.25 * env.min_length() * env.min_length(), 1e-6) *
                             env.min_length();
    TreeEnvironment work = env;
    while (work.interface(static_cast<std::int64_t>(work.horizon())) < reach) {
        if (!work.config())
            throw DomainError("ldp_trend: environment horizon does not cover v*t");
        work = extended(work, work.horizon() * 2);
    }

    std::map<std::int64_t, detail::FactorEstimate> hop_cache;
    auto hop = [&](std::int64_t k) -> const detail::FactorEstimate& {
        auto it = hop_cache.find(k);
        if (it == hop_cache.end())
            it = hop_cache.emplace(k, detail::hop_factor(work, k, lambda, n_paths, opts)).first;
        return it->second;
    };

    std::vector<LdpTrendRow> rows;
    rows.reserve(t_grid.size());
    for (double t : t_grid) {
        const double lo_x = c * t, hi_x = v * t;
        std::int64_t j_hi = 0, j_lo = 0;
        while (work.interface(j_hi + 1) <= hi_x + 1e-12) ++j_hi;
        j_lo = j_hi;
        while (j_lo > 0 && work.interface(j_lo - 1) >= lo_x - 1e-12) --j_lo;

        LdpTrendRow row;
        row.t = t;
        double sum_ln = 0.0, var_ln = 0.0;
        bool ok = true;
        for (std::int64_t k = j_lo; k < j_hi; ++k) {
            const auto& f = hop(k);
            if (!f.ok) {
                ok = false;
                break;
            }
            sum_ln += std::log(f.mean);
            var_ln += (f.se / f.mean) * (f.se / f.mean);
        }
        // partial top edge: from v t (interior) down to z_{j_hi}
        if (ok && hi_x > work.interface(j_hi) + 1e-12) {
            const auto f = detail::mc_partial_from_interior(work, hi_x, j_hi, lambda, n_paths, opts);
            if (f.ok) {
                sum_ln += std::log(f.mean);
                var_ln += (f.se / f.mean) * (f.se / f.mean);
            } else {
                ok = false;
            }
        }
        // partial bottom edge: from z_{j_lo} down to the interior level c t
        if (ok && lo_x < work.interface(j_lo) - 1e-12) {
            const auto f = detail::mc_partial_to_interior(work, j_lo, lo_x, n_paths, lambda, opts);
            if (f.ok) {
                sum_ln += std::log(f.mean);
                var_ln += (f.se / f.mean) * (f.se / f.mean);
            } else {
                ok = false;
            }
        }
        row.flagged = !ok;
        row.value = ok ? sum_ln / ((v - c) * t) : -std::numeric_limits<double>::infinity();
        row.std_error = ok ? std::sqrt(var_ln) / ((v - c) * t) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

} // namespace skewfront
