/*
   Copyright 2026 The rwre Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rwre/rng.hpp"

namespace rwre {

using Site = std::int64_t;

/// Raised when an operation needs conductances outside the stored window.
class WindowError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

enum class GeneratorKind { iid_uniform, markov_modulated, deterministic_srw };

inline std::string to_string(GeneratorKind kind)
{
    switch (kind) {
    case GeneratorKind::iid_uniform: return "iid_uniform";
    case GeneratorKind::markov_modulated: return "markov_modulated";
    case GeneratorKind::deterministic_srw: return "deterministic_srw";
    }
    return "unknown";
}

inline GeneratorKind generator_kind_from_string(const std::string& s)
{
    if (s == "iid_uniform" || s == "iid") return GeneratorKind::iid_uniform;
    if (s == "markov_modulated" || s == "markov") return GeneratorKind::markov_modulated;
    if (s == "deterministic_srw" || s == "srw") return GeneratorKind::deterministic_srw;
    throw std::invalid_argument("unknown generator kind: " + s);
}

struct EnvironmentParams {
    double kappa = 1.0;
    double K_bound = 2.0;
    double beta = 1.0;
    int R_max = 1;
    Site x_min = -64;
    Site x_max = 4160;
    GeneratorKind generator_kind = GeneratorKind::deterministic_srw;
    std::uint64_t seed = 0;
    // Translation applied by shift(): stored site x carries the draw keyed on x + origin.
    Site origin = 0;

    bool operator==(const EnvironmentParams&) const = default;

    /// Condition-K cap K/(1 + d^{3+beta}) for jump length d.
    double tail_cap(int d) const { return K_bound / (1.0 + std::pow(static_cast<double>(d), 3.0 + beta)); }

    /// Ellipticity constant for C_x. The tail sum runs over d <= R_max since
    /// longer edges are identically zero.
    double kappa_hat() const
    {
        double tail = 0.0;
        for (int d = 1; d <= R_max; ++d) tail += tail_cap(d);
        return std::min(kappa, 1.0 / (2.0 * tail));
    }

    void check() const
    {
        if (!(kappa > 0.0) || !(K_bound > 0.0) || !(beta > 0.0))
            throw std::invalid_argument("kappa, K_bound and beta must be positive");
        if (R_max < 1) throw std::invalid_argument("R_max must be at least 1");
        if (x_min >= x_max) throw std::invalid_argument("x_min must be below x_max");
        if (x_max - x_min < 2 * static_cast<Site>(R_max))
            throw std::invalid_argument("window too small: x_max - x_min < 2 R_max");
        if (kappa > tail_cap(1))
            throw std::invalid_argument("infeasible parameters: kappa exceeds the tail cap at distance 1");
    }

    // Nearest-neighbour walk presets: kappa_hat = min(1, 1/2).
    static EnvironmentParams srw(Site x_min, Site x_max)
    {
        EnvironmentParams p;
        p.generator_kind = GeneratorKind::deterministic_srw;
        p.x_min = x_min;
        p.x_max = x_max;
        return p;
    }

    static EnvironmentParams random(GeneratorKind kind, int R_max, std::uint64_t seed, Site x_min, Site x_max)
    {
        EnvironmentParams p;
        p.kappa = 0.5;
        p.K_bound = 2.0;
        p.beta = 1.0;
        p.R_max = R_max;
        p.generator_kind = kind;
        p.seed = seed;
        p.x_min = x_min;
        p.x_max = x_max;
        return p;
    }
};

struct TransitionRow {
    Site x = 0;
    std::vector<std::pair<Site, double>> targets;
    double total_conductance = 0.0;
};

/// Banded symmetric conductance field. Row x stores w(x, x+d), d = 1..R_max;
/// w(x, y) for y < x is read from row y, so symmetry holds by construction.
class Environment {
public:
    Environment(EnvironmentParams params, std::vector<double> weights)
        : params_(std::move(params))
        , weights_(std::move(weights))
    {
        params_.check();
        const auto expected = static_cast<std::size_t>(params_.x_max - params_.x_min + 1) * R();
        if (weights_.size() != expected) throw std::invalid_argument("weight table size does not match window");
    }

    const EnvironmentParams& params() const { return params_; }
    int R() const { return params_.R_max; }
    Site x_min() const { return params_.x_min; }
    Site x_max() const { return params_.x_max; }
    const std::vector<double>& weights() const { return weights_; }

    bool has_row(Site x) const { return x >= x_min() && x <= x_max(); }

    /// Stored entry w(x, x+d).
    double edge(Site x, int d) const
    {
        if (!has_row(x)) throw WindowError("edge row " + std::to_string(x) + " outside window");
        if (d < 1 || d > R()) return 0.0;
        return weights_[index(x, d)];
    }

    void set_edge(Site x, int d, double w)
    {
        if (!has_row(x) || d < 1 || d > R()) throw WindowError("set_edge outside window");
        weights_[index(x, d)] = w;
    }

    double weight(Site x, Site y) const
    {
        const Site d = y > x ? y - x : x - y;
        if (d == 0 || d > R()) return 0.0;
        return edge(std::min(x, y), static_cast<int>(d));
    }

    /// Sites whose full neighbourhood [x - R, x + R] has known conductances.
    bool walkable(Site x) const { return x - R() >= x_min() && x <= x_max(); }
    Site first_walkable() const { return x_min() + R(); }
    Site last_walkable() const { return x_max(); }

    double conductance_sum(Site x) const
    {
        require_walkable(x);
        double c = 0.0;
        for (int d = 1; d <= R(); ++d) c += edge(x - d, d) + edge(x, d);
        return c;
    }

    void require_walkable(Site x) const
    {
        if (!walkable(x)) throw WindowError("site " + std::to_string(x) + " has no complete transition row");
    }

    bool operator==(const Environment& other) const = default;

private:
    std::size_t index(Site x, int d) const
    {
        return static_cast<std::size_t>(x - x_min()) * static_cast<std::size_t>(R()) + static_cast<std::size_t>(d - 1);
    }

    EnvironmentParams params_;
    std::vector<double> weights_;
};

namespace detail {

inline constexpr std::uint32_t kModulationTag = 0xFFFF0000u;
inline constexpr double kRegenerationRate = 0.75;
inline constexpr Site kRegenerationScanCap = 4096;

// Two-state modulation with renewal: at each site the state is redrawn from
// the stationary law (1/2, 1/2) with probability kRegenerationRate, otherwise
// copied from the left neighbour. This is a stationary Markov chain whose value
// at x depends only on keyed draws at sites <= x, hence is window-independent.
inline bool regenerates(std::uint64_t seed, Site x)
{
    return keyed_uniform(seed, x, kModulationTag, 1) < kRegenerationRate;
}

inline double fresh_factor(std::uint64_t seed, Site x)
{
    return keyed_uniform(seed, x, kModulationTag, 2) < 0.5 ? 0.5 : 1.0;
}

inline double modulation_at(std::uint64_t seed, Site x)
{
    for (Site back = 0; back < kRegenerationScanCap; ++back)
        if (regenerates(seed, x - back)) return fresh_factor(seed, x - back);
    return fresh_factor(seed, x - kRegenerationScanCap);
}

inline double iid_draw(const EnvironmentParams& p, Site keyed_site, int d)
{
    const double lo = d == 1 ? p.kappa : 0.0;
    const double hi = p.tail_cap(d);
    return lo + (hi - lo) * keyed_uniform(p.seed, keyed_site, static_cast<std::uint32_t>(d));
}

} // namespace detail

inline Environment generate(const EnvironmentParams& params)
{
    params.check();
    const int R = params.R_max;
    const auto rows = static_cast<std::size_t>(params.x_max - params.x_min + 1);
    std::vector<double> w(rows * static_cast<std::size_t>(R), 0.0);

    double factor = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const Site x = params.x_min + static_cast<Site>(r);
        const Site key = x + params.origin;
        double* row = w.data() + r * static_cast<std::size_t>(R);
        switch (params.generator_kind) {
        case GeneratorKind::deterministic_srw:
            row[0] = 1.0;
            break;
        case GeneratorKind::iid_uniform:
            for (int d = 1; d <= R; ++d) row[d - 1] = detail::iid_draw(params, key, d);
            break;
        case GeneratorKind::markov_modulated:
            factor = r == 0 ? detail::modulation_at(params.seed, key)
                            : (detail::regenerates(params.seed, key) ? detail::fresh_factor(params.seed, key) : factor);
            for (int d = 1; d <= R; ++d) {
                double v = factor * detail::iid_draw(params, key, d);
                if (d == 1) v = std::max(v, params.kappa);
                row[d - 1] = v;
            }
            break;
        }
    }
    return Environment(params, std::move(w));
}

struct Violation {
    Site x = 0;
    int d = 0;
    char condition = 'E'; // 'E': nearest-neighbour ellipticity, 'K': tail bound, 'C': C_x outside [kh, 1/kh]
    double value = 0.0;
    double bound = 0.0;
};

struct ValidationReport {
    bool pass = true;
    double kappa_hat = 0.0;
    double min_conductance_sum = 0.0;
    double max_conductance_sum = 0.0;
    std::vector<Violation> violations;
};

inline ValidationReport validate(const Environment& env)
{
    const auto& p = env.params();
    ValidationReport rep;
    rep.kappa_hat = p.kappa_hat();
    for (Site x = env.x_min(); x <= env.x_max(); ++x) {
        const double nn = env.edge(x, 1);
        if (nn < p.kappa) rep.violations.push_back({x, 1, 'E', nn, p.kappa});
        for (int d = 1; d <= env.R(); ++d) {
            const double w = env.edge(x, d);
            if (w > p.tail_cap(d)) rep.violations.push_back({x, d, 'K', w, p.tail_cap(d)});
            if (w < 0.0 || !std::isfinite(w)) rep.violations.push_back({x, d, 'K', w, 0.0});
        }
    }
    rep.min_conductance_sum = std::numeric_limits<double>::infinity();
    rep.max_conductance_sum = 0.0;
    for (Site x = env.first_walkable(); x <= env.last_walkable(); ++x) {
        const double c = env.conductance_sum(x);
        rep.min_conductance_sum = std::min(rep.min_conductance_sum, c);
        rep.max_conductance_sum = std::max(rep.max_conductance_sum, c);
        if (c < rep.kappa_hat) rep.violations.push_back({x, 0, 'C', c, rep.kappa_hat});
        if (c > 1.0 / rep.kappa_hat) rep.violations.push_back({x, 0, 'C', c, 1.0 / rep.kappa_hat});
    }
    rep.pass = rep.violations.empty();
    return rep;
}

/// theta_z: the result's weight at (x, d) is the original's at (x + z, d).
/// The result keeps the original coordinate window intersected with its
/// translate, so both environments agree about which sites exist.
inline Environment shift(const Environment& env, Site z)
{
    EnvironmentParams p = env.params();
    p.x_min = std::max(env.x_min(), env.x_min() - z);
    p.x_max = std::min(env.x_max(), env.x_max() - z);
    if (p.x_max - p.x_min < 2 * static_cast<Site>(env.R()))
        throw WindowError("shift by " + std::to_string(z) + " exhausts the window");
    p.origin += z;
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(p.x_max - p.x_min + 1) * env.R());
    for (Site x = p.x_min; x <= p.x_max; ++x)
        for (int d = 1; d <= env.R(); ++d) w.push_back(env.edge(x + z, d));
    return Environment(std::move(p), std::move(w));
}

inline TransitionRow transition_row(const Environment& env, Site x)
{
    env.require_walkable(x);
    TransitionRow row;
    row.x = x;
    row.total_conductance = env.conductance_sum(x);
    for (Site y = x - env.R(); y <= x + env.R(); ++y) {
        if (y == x) continue;
        row.targets.emplace_back(y, env.weight(x, y) / row.total_conductance);
    }
    return row;
}

/// Precomputed transition probabilities for every walkable site, laid out
/// as 2R consecutive entries per site (jumps -R..-1 then 1..R). Immutable,
/// shared read-only by sampling workers.
class TransitionKernel {
public:
    explicit TransitionKernel(const Environment& env)
        : R_(env.R())
        , first_(env.first_walkable())
        , last_(env.last_walkable())
    {
        const auto sites = static_cast<std::size_t>(last_ - first_ + 1);
        prob_.resize(sites * width());
        cumulative_.resize(prob_.size());
        for (Site x = first_; x <= last_; ++x) {
            const double c = env.conductance_sum(x);
            double acc = 0.0;
            for (int j = 0; j < width(); ++j) {
                const double p = env.weight(x, x + jump(j)) / c;
                prob_[offset(x) + j] = p;
                acc += p;
                cumulative_[offset(x) + j] = acc;
            }
        }
    }

    int R() const { return R_; }
    int width() const { return 2 * R_; }
    Site first() const { return first_; }
    Site last() const { return last_; }
    bool contains(Site x) const { return x >= first_ && x <= last_; }

    /// Jump length for slot j.
    int jump(int j) const { return j < R_ ? j - R_ : j - R_ + 1; }

    std::span<const double> probabilities(Site x) const
    {
        require(x);
        return {prob_.data() + offset(x), static_cast<std::size_t>(width())};
    }

    double p(Site x, Site y) const
    {
        const Site d = y - x;
        if (d == 0 || d > R_ || d < -R_) return 0.0;
        require(x);
        const int j = d < 0 ? static_cast<int>(d) + R_ : static_cast<int>(d) + R_ - 1;
        return prob_[offset(x) + j];
    }

    Site step(Site x, double u) const
    {
        require(x);
        const double* cum = cumulative_.data() + offset(x);
        const double target = u * cum[width() - 1];
        int j = 0;
        while (j < width() - 1 && cum[j] <= target) ++j;
        while (j > 0 && prob_[offset(x) + j] == 0.0) --j;
        return x + jump(j);
    }

    void require(Site x) const
    {
        if (!contains(x)) throw WindowError("walk left the environment window at site " + std::to_string(x));
    }

private:
    std::size_t offset(Site x) const { return static_cast<std::size_t>(x - first_) * static_cast<std::size_t>(width()); }

    int R_;
    Site first_;
    Site last_;
    std::vector<double> prob_;
    std::vector<double> cumulative_;
};

// ---------------------------------------------------------------------------
// JSON file format. Doubles are written in shortest round-trip form, so
// write -> read reproduces every weight bit for bit.

inline constexpr int kEnvironmentFormatVersion = 1;

inline nlohmann::json to_json(const Environment& env)
{
    const auto& p = env.params();
    nlohmann::json j;
    j["format_version"] = kEnvironmentFormatVersion;
    j["kappa"] = p.kappa;
    j["K_bound"] = p.K_bound;
    j["beta"] = p.beta;
    j["R_max"] = p.R_max;
    j["x_min"] = p.x_min;
    j["x_max"] = p.x_max;
    j["generator_kind"] = to_string(p.generator_kind);
    j["seed"] = p.seed;
    j["origin"] = p.origin;
    nlohmann::json rows = nlohmann::json::array();
    for (Site x = env.x_min(); x <= env.x_max(); ++x) {
        nlohmann::json row = nlohmann::json::array();
        for (int d = 1; d <= env.R(); ++d) row.push_back(env.edge(x, d));
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j;
}

inline Environment environment_from_json(const nlohmann::json& j)
{
    if (j.at("format_version").get<int>() != kEnvironmentFormatVersion)
        throw std::invalid_argument("unsupported environment format_version");
    EnvironmentParams p;
    p.kappa = j.at("kappa").get<double>();
    p.K_bound = j.at("K_bound").get<double>();
    p.beta = j.at("beta").get<double>();
    p.R_max = j.at("R_max").get<int>();
    p.x_min = j.at("x_min").get<Site>();
    p.x_max = j.at("x_max").get<Site>();
    p.generator_kind = generator_kind_from_string(j.at("generator_kind").get<std::string>());
    p.seed = j.at("seed").get<std::uint64_t>();
    p.origin = j.value("origin", Site{0});
    p.check();
    const auto& rows = j.at("rows");
    if (rows.size() != static_cast<std::size_t>(p.x_max - p.x_min + 1))
        throw std::invalid_argument("row count does not match window");
    std::vector<double> w;
    w.reserve(rows.size() * static_cast<std::size_t>(p.R_max));
    for (const auto& row : rows) {
        if (row.size() != static_cast<std::size_t>(p.R_max)) throw std::invalid_argument("row width != R_max");
        for (const auto& v : row) w.push_back(v.get<double>());
    }
    return Environment(p, std::move(w));
}

inline void write_environment(const Environment& env, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << to_json(env).dump() << '\n';
}

inline Environment read_environment(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return environment_from_json(nlohmann::json::parse(in));
}

inline nlohmann::json to_json(const ValidationReport& rep)
{
    nlohmann::json j;
    j["pass"] = rep.pass;
    j["kappa_hat"] = rep.kappa_hat;
    j["min_conductance_sum"] = rep.min_conductance_sum;
    j["max_conductance_sum"] = rep.max_conductance_sum;
    j["violations"] = nlohmann::json::array();
    for (const auto& v : rep.violations)
        j["violations"].push_back(
            {{"x", v.x}, {"d", v.d}, {"condition", std::string(1, v.condition)}, {"value", v.value}, {"bound", v.bound}});
    return j;
}

} // namespace rwre
