#pragma once

// Random tree environments (d⃗, ℓ⃗) and their projection data (p⃗, z⃗).
//
// Only the nonnegative side is materialized. The negative side follows from the
// symmetry z_{-i} = -z_i, p_{-i} = 1 - p_i and is served by accessors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "skewfront/errors.hpp"
#include "skewfront/rng.hpp"

namespace skewfront {

struct DegreeAtom {
    int degree = 2;
    double weight = 1.0;
};

struct LengthAtom {
    double length = 1.0;
    double weight = 1.0;
};

/// Law of the i.i.d. branch lengths: finite support or bounded uniform.
struct LengthLaw {
    bool continuous = false;
    std::vector<LengthAtom> atoms; // discrete case
    double lo = 1.0, hi = 1.0;     // continuous case

    static LengthLaw discrete(std::vector<LengthAtom> a) {
        LengthLaw law;
        law.atoms = std::move(a);
        return law;
    }
    static LengthLaw uniform(double lo, double hi) {
        LengthLaw law;
        law.continuous = true;
        law.lo = lo;
        law.hi = hi;
        return law;
    }

    double min_length() const {
        if (continuous) return lo;
        double m = atoms.front().length;
        for (const auto& a : atoms) m = std::min(m, a.length);
        return m;
    }
    double max_length() const {
        if (continuous) return hi;
        double m = atoms.front().length;
        for (const auto& a : atoms) m = std::max(m, a.length);
        return m;
    }
    double mean_length() const {
        if (continuous) return 0.5 * (lo + hi);
        double s = 0.0;
        for (const auto& a : atoms) s += a.weight * a.length;
        return s;
    }
};

struct EnvConfig {
    std::vector<DegreeAtom> degree_support;
    LengthLaw length_law;
    std::size_t horizon = 0;
    std::uint64_t seed = 0;

    void validate() const {
        if (degree_support.empty()) throw ConfigError("degree_support: empty");
        double wsum = 0.0;
        for (const auto& a : degree_support) {
            if (a.degree < 2) throw ConfigError("degree_support: degree < 2");
            if (a.weight < 0.0) throw ConfigError("degree_support: negative weight");
            wsum += a.weight;
        }
        if (std::abs(wsum - 1.0) > 1e-12) throw ConfigError("degree_support: weights do not sum to 1");
        if (length_law.continuous) {
            if (!(length_law.lo > 0.0) || !(length_law.lo <= length_law.hi) ||
                !std::isfinite(length_law.hi))
                throw ConfigError("length_support: bounds must satisfy 0 < lo <= hi < inf");
        } else {
            if (length_law.atoms.empty()) throw ConfigError("length_support: empty");
            double lw = 0.0;
            for (const auto& a : length_law.atoms) {
                if (!(a.length > 0.0) || !std::isfinite(a.length))
                    throw ConfigError("length_support: lengths must be positive and finite");
                if (a.weight < 0.0) throw ConfigError("length_support: negative weight");
                lw += a.weight;
            }
            if (std::abs(lw - 1.0) > 1e-12)
                throw ConfigError("length_support: weights do not sum to 1");
        }
        if (horizon == 0) throw ConfigError("horizon: must be >= 1");
    }

    int max_degree() const {
        int m = 2;
        for (const auto& a : degree_support) m = std::max(m, a.degree);
        return m;
    }
    int min_degree() const {
        int m = degree_support.front().degree;
        for (const auto& a : degree_support) m = std::min(m, a.degree);
        return m;
    }
};

/// One realized environment. Immutable after construction.
class TreeEnvironment {
public:
    TreeEnvironment(std::vector<int> degrees, std::vector<double> lengths, std::uint64_t seed,
                    std::optional<EnvConfig> config = std::nullopt)
        : degrees_(std::move(degrees)), lengths_(std::move(lengths)), seed_(seed),
          config_(std::move(config)) {
        if (degrees_.size() != lengths_.size())
            throw ValidationError("degrees and lengths must have equal horizon");
        if (degrees_.empty()) throw ValidationError("environment horizon must be >= 1");
        skewness_.reserve(degrees_.size());
        for (int d : degrees_) {
            if (d < 2)
                throw ValidationError("degree < 2 (skewness p = (d-1)/d would fall below 1/2)");
            skewness_.push_back(static_cast<double>(d - 1) / static_cast<double>(d));
        }
        interfaces_.resize(lengths_.size() + 1);
        interfaces_[0] = 0.0;
        for (std::size_t i = 0; i < lengths_.size(); ++i) {
            if (!(lengths_[i] > 0.0) || !std::isfinite(lengths_[i]))
                throw ValidationError("branch lengths must be positive and finite");
            interfaces_[i + 1] = interfaces_[i] + lengths_[i];
        }
    }

    /// Number of materialized generations N: degrees d_1..d_N, lengths l_0..l_{N-1}.
    std::size_t horizon() const { return degrees_.size(); }

    std::uint64_t seed() const { return seed_; }
    const std::optional<EnvConfig>& config() const { return config_; }

    const std::vector<int>& degrees() const { return degrees_; }
    const std::vector<double>& lengths() const { return lengths_; }

    /// d_i for any i in Z with |i| <= horizon; d_0 = 2 by construction.
    int degree(std::int64_t i) const {
        if (i == 0) return 2;
        return degrees_.at(static_cast<std::size_t>(std::llabs(i)) - 1);
    }

    /// p_i := (d_i - 1)/d_i for i > 0; p_0 = 1/2; p_{-i} = 1 - p_i.
    double skewness(std::int64_t i) const {
        if (i == 0) return 0.5;
        const double p = skewness_.at(static_cast<std::size_t>(std::llabs(i)) - 1);
        return i > 0 ? p : 1.0 - p;
    }

    /// z_i; z_{-i} = -z_i.
    double interface(std::int64_t i) const {
        const double z = interfaces_.at(static_cast<std::size_t>(std::llabs(i)));
        return i >= 0 ? z : -z;
    }

    /// Length of the edge from z_i to z_{i+1} (valid for -horizon <= i < horizon).
    double edge_length(std::int64_t i) const {
        const std::int64_t j = i >= 0 ? i : -i - 1;
        return lengths_.at(static_cast<std::size_t>(j));
    }

    bool is_degenerate_line() const {
        return std::all_of(degrees_.begin(), degrees_.end(), [](int d) { return d == 2; });
    }

    bool is_constant() const {
        return std::all_of(degrees_.begin(), degrees_.end(),
                           [&](int d) { return d == degrees_.front(); }) &&
               std::all_of(lengths_.begin(), lengths_.end(),
                           [&](double l) { return l == lengths_.front(); });
    }

    double mean_length() const {
        double s = 0.0;
        for (double l : lengths_) s += l;
        return s / static_cast<double>(lengths_.size());
    }

    double min_length() const { return *std::min_element(lengths_.begin(), lengths_.end()); }
    double max_length() const { return *std::max_element(lengths_.begin(), lengths_.end()); }
    int max_degree() const { return *std::max_element(degrees_.begin(), degrees_.end()); }
    int min_degree() const { return *std::min_element(degrees_.begin(), degrees_.end()); }

    /// FNV-1a digest over (seed, degrees, length bits); identifies the realization.
    std::string digest() const {
        std::uint64_t h = UINT64_C(0xcbf29ce484222325);
        auto mix = [&h](std::uint64_t v) {
            for (int b = 0; b < 8; ++b) {
                h ^= (v >> (8 * b)) & 0xffu;
                h *= UINT64_C(0x100000001b3);
            }
        };
        mix(seed_);
        for (int d : degrees_) mix(static_cast<std::uint64_t>(d));
        for (double l : lengths_) {
            std::uint64_t bits;
            static_assert(sizeof(bits) == sizeof(l));
            std::memcpy(&bits, &l, sizeof(bits));
            mix(bits);
        }
        char out[17];
        std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
        return std::string(out);
    }

private:
    std::vector<int> degrees_;        // d_1..d_N
    std::vector<double> lengths_;     // l_0..l_{N-1}
    std::vector<double> skewness_;    // p_1..p_N
    std::vector<double> interfaces_;  // z_0..z_N
    std::uint64_t seed_;
    std::optional<EnvConfig> config_;
};

namespace detail {

inline int draw_degree(const EnvConfig& cfg, double u) {
    double acc = 0.0;
    for (const auto& a : cfg.degree_support) {
        acc += a.weight;
        if (u < acc) return a.degree;
    }
    return cfg.degree_support.back().degree;
}

inline double draw_length(const EnvConfig& cfg, double u) {
    const auto& law = cfg.length_law;
    if (law.continuous) return law.lo + (law.hi - law.lo) * u;
    double acc = 0.0;
    for (const auto& a : law.atoms) {
        acc += a.weight;
        if (u < acc) return a.length;
    }
    return law.atoms.back().length;
}

} // namespace detail

/// Draw (d_1..d_N, l_0..l_{N-1}) i.i.d. from the configured supports.
/// Deterministic given the seed; entry i depends only on (seed, i).
inline TreeEnvironment generate(const EnvConfig& config) {
    config.validate();
    std::vector<int> degrees(config.horizon);
    std::vector<double> lengths(config.horizon);
    for (std::size_t i = 0; i < config.horizon; ++i) {
        degrees[i] = detail::draw_degree(config, stream_value(config.seed, "env.degrees", i + 1));
        lengths[i] = detail::draw_length(config, stream_value(config.seed, "env.lengths", i));
    }
    return TreeEnvironment(std::move(degrees), std::move(lengths), config.seed, config);
}

/// Same realization extended to at least `horizon` generations (generator-backed
/// environments only). The existing prefix is reproduced bit-exactly.
inline TreeEnvironment extended(const TreeEnvironment& env, std::size_t horizon) {
    if (horizon <= env.horizon())
        return env;
    if (!env.config())
        throw DomainError("cannot extend an environment that has no generator config");
    EnvConfig cfg = *env.config();
    cfg.horizon = horizon;
    return generate(cfg);
}

inline void save(const TreeEnvironment& env, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["seed"] = env.seed();
    j["degrees"] = env.degrees();
    j["lengths"] = env.lengths();
    // Optional generator block so loaded environments stay extendable from the
    // same stream. Derived fields are still recomputed on load, never stored.
    if (env.config()) {
        const auto& cfg = *env.config();
        nlohmann::json gen;
        for (const auto& a : cfg.degree_support)
            gen["degree_support"].push_back({a.degree, a.weight});
        if (cfg.length_law.continuous) {
            gen["length_law"] = {{"type", "uniform"},
                                 {"lo", cfg.length_law.lo},
                                 {"hi", cfg.length_law.hi}};
        } else {
            nlohmann::json atoms;
            for (const auto& a : cfg.length_law.atoms) atoms.push_back({a.length, a.weight});
            gen["length_law"] = {{"type", "discrete"}, {"atoms", atoms}};
        }
        j["generator"] = gen;
    }
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

inline TreeEnvironment load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    for (const char* key : {"schema_version", "seed", "degrees", "lengths"})
        if (!j.contains(key)) throw ParseError(path + ": missing key '" + key + "'");
    if (j["schema_version"].get<int>() != 1)
        throw ParseError(path + ": unsupported schema_version");
    std::vector<int> degrees;
    std::vector<double> lengths;
    try {
        degrees = j["degrees"].get<std::vector<int>>();
        lengths = j["lengths"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    const auto seed = j["seed"].get<std::uint64_t>();

    std::optional<EnvConfig> config;
    if (j.contains("generator")) {
        try {
            EnvConfig cfg;
            for (const auto& a : j["generator"]["degree_support"])
                cfg.degree_support.push_back({a.at(0).get<int>(), a.at(1).get<double>()});
            const auto& law = j["generator"]["length_law"];
            if (law.at("type") == "uniform") {
                cfg.length_law =
                    LengthLaw::uniform(law.at("lo").get<double>(), law.at("hi").get<double>());
            } else {
                std::vector<LengthAtom> atoms;
                for (const auto& a : law.at("atoms"))
                    atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
                cfg.length_law = LengthLaw::discrete(atoms);
            }
            cfg.horizon = degrees.size();
            cfg.seed = seed;
            cfg.validate();
            // Accept the block only if it actually reproduces the stored data;
            // hand-edited files fall back to non-extendable.
            const auto regen = generate(cfg);
            if (regen.degrees() == degrees && regen.lengths() == lengths) config = cfg;
        } catch (const std::exception&) {
            config.reset();
        }
    }
    return TreeEnvironment(std::move(degrees), std::move(lengths), seed, std::move(config));
}

} // namespace skewfront
