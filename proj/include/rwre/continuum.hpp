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
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rwre/rng.hpp"

namespace rwre {

enum class PathKind { bm, meander, bessel3 };

inline std::string to_string(PathKind k)
{
    switch (k) {
    case PathKind::bm: return "bm";
    case PathKind::meander: return "meander";
    case PathKind::bessel3: return "bessel3";
    }
    return "unknown";
}

/// Values on the uniform grid t_k = k * dt.
struct ContinuumPath {
    PathKind kind = PathKind::bm;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> values;

    double time(std::size_t k) const { return static_cast<double>(k) * dt; }
    double horizon() const { return values.empty() ? 0.0 : time(values.size() - 1); }

    /// Linear interpolation; t beyond the horizon returns the last value.
    double at(double t) const
    {
        if (values.empty()) throw std::logic_error("empty path");
        if (t <= 0.0) return values.front();
        const double s = t / dt;
        const auto k = static_cast<std::size_t>(std::floor(s));
        if (k + 1 >= values.size()) return values.back();
        return values[k] + (s - static_cast<double>(k)) * (values[k + 1] - values[k]);
    }

    double sup() const
    {
        double m = -std::numeric_limits<double>::infinity();
        for (double v : values) m = std::max(m, v);
        return m;
    }
};

namespace detail {

inline std::size_t grid_steps(double dt, double horizon)
{
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

} // namespace detail

inline ContinuumPath sample_bm(double dt, double horizon, std::uint64_t seed, std::uint64_t stream = 0)
{
    const std::size_t n = detail::grid_steps(dt, horizon);
    Stream rng(seed, stream);
    ContinuumPath p{PathKind::bm, dt, seed, {}};
    p.values.reserve(n + 1);
    p.values.push_back(0.0);
    const double s = std::sqrt(dt);
    double w = 0.0;
    for (std::size_t k = 0; k < n; ++k) p.values.push_back(w += s * rng.normal());
    return p;
}

// ---------------------------------------------------------------------------
// Meander via the last zero of W on [0, 1].

inline constexpr double kMaxMeanderDt = 0x1.0p-10;
inline constexpr double kHiddenZeroCutoff = 1e-16;
inline constexpr int kZeroRefineDepth = 24;

namespace detail {

/// Last zero of a Brownian bridge from (t0, a) to (t1, b), sampled by dyadic
/// midpoint refinement; nullopt if the bridge stays off zero. Same-sign
/// halves whose zero probability exp(-2ab/h) is negligible are pruned.
inline std::optional<double> bridge_last_zero(double t0, double a, double t1, double b, Stream& rng, int depth)
{
    const double h = t1 - t0;
    const bool crosses = (a <= 0.0 && b >= 0.0) || (a >= 0.0 && b <= 0.0);
    if (!crosses) {
        const double p = std::exp(-2.0 * a * b / h);
        if (p < kHiddenZeroCutoff) return std::nullopt;
        if (depth == 0) return rng.uniform() < p ? std::optional<double>(0.5 * (t0 + t1)) : std::nullopt;
    } else if (depth == 0) {
        if (a == b) return t1;
        return t0 + h * a / (a - b);
    }
    const double tm = 0.5 * (t0 + t1);
    const double m = 0.5 * (a + b) + 0.5 * std::sqrt(h) * rng.normal();
    if (auto z = bridge_last_zero(tm, m, t1, b, rng, depth - 1)) return z;
    return bridge_last_zero(t0, a, tm, m, rng, depth - 1);
}

} // namespace detail

struct MeanderSample {
    ContinuumPath path;
    double tau = 0.0;          // last zero of the driving W
    std::size_t resamples = 0; // draws rejected because 1 - tau < dt
};

/// W+(s) = |W(tau + s (1 - tau))| / sqrt(1 - tau) on the grid s = k dt, with
/// tau the last zero of W before 1.
inline MeanderSample sample_meander(double dt, std::uint64_t seed, std::uint64_t stream = 0)
{
    if (!(dt > 0.0) || dt > kMaxMeanderDt) throw std::invalid_argument("meander dt must lie in (0, 2^-10]");
    const std::size_t n = detail::grid_steps(dt, 1.0);
    const double h = 1.0 / static_cast<double>(n);
    Stream rng(seed, stream);
    MeanderSample out;
    std::vector<double> w(n + 1);
    for (;;) {
        w[0] = 0.0;
        const double s = std::sqrt(h);
        for (std::size_t k = 0; k < n; ++k) w[k + 1] = w[k] + s * rng.normal();

        std::optional<double> tau;
        std::size_t cell = 0;
        for (std::size_t k = n; k-- > 0;) {
            tau = detail::bridge_last_zero(static_cast<double>(k) * h, w[k], static_cast<double>(k + 1) * h, w[k + 1],
                                           rng, kZeroRefineDepth);
            if (tau) {
                cell = k;
                break;
            }
        }
        if (!tau) tau = 0.0; // unreachable: W(0) = 0
        const double delta = 1.0 - *tau;
        if (delta < dt) {
            ++out.resamples;
            continue;
        }

        // W on [tau, 1]: zero at tau, then the coarse grid.
        const auto W_at = [&](double t) {
            const double cell_end = static_cast<double>(cell + 1) * h;
            if (t <= cell_end) {
                const double span = cell_end - *tau;
                return span > 0.0 ? w[cell + 1] * (t - *tau) / span : w[cell + 1];
            }
            const double u = t / h;
            const auto k = std::min(static_cast<std::size_t>(std::floor(u)), n - 1);
            return w[k] + (u - static_cast<double>(k)) * (w[k + 1] - w[k]);
        };
        out.tau = *tau;
        out.path = ContinuumPath{PathKind::meander, dt, seed, {}};
        out.path.values.reserve(n + 1);
        const double scale = 1.0 / std::sqrt(delta);
        for (std::size_t k = 0; k <= n; ++k) {
            const double t = k == n ? 1.0 : *tau + static_cast<double>(k) * h * delta;
            out.path.values.push_back(k == 0 ? 0.0 : std::abs(W_at(t)) * scale);
        }
        out.path.values.back() = std::abs(w[n]) * scale;
        return out;
    }
}

/// W+_t(s) = sqrt(t) W+(s / t) on [0, t].
inline ContinuumPath meander_scaled(const ContinuumPath& path, double t)
{
    if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
    ContinuumPath out = path;
    out.dt = path.dt * t;
    const double s = std::sqrt(t);
    for (double& v : out.values) v *= s;
    return out;
}

// ---------------------------------------------------------------------------
// Bessel-3 and the crossing time rho_1.

inline ContinuumPath sample_bessel3(double dt, double horizon, std::uint64_t seed, std::uint64_t stream = 0)
{
    const std::size_t n = detail::grid_steps(dt, horizon);
    Stream rng(seed, stream);
    ContinuumPath p{PathKind::bessel3, dt, seed, {}};
    p.values.reserve(n + 1);
    p.values.push_back(0.0);
    const double s = std::sqrt(dt);
    double x = 0.0, y = 0.0, z = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        x += s * rng.normal();
        y += s * rng.normal();
        z += s * rng.normal();
        p.values.push_back(std::sqrt(x * x + y * y + z * z));
    }
    return p;
}

inline constexpr double kDefaultRhoDt = 1e-4;
inline constexpr double kRhoHorizonFactor = 1000.0;

struct Rho1Sample {
    double rho = 0.0;
    std::optional<double> stopped_at_t0; // B3(t0 ^ rho) when requested
    std::optional<ContinuumPath> path;   // B3(. ^ rho) on [0, rho] when requested
};

/// First passage of B3 at level 1/sigma. A grid crossing is located by linear
/// interpolation; between two grid values below the level, a crossing inside
/// the step is drawn with the Brownian-bridge probability
/// exp(-2 (L - r0)(L - r1) / dt) and placed at the step midpoint.
inline Rho1Sample sample_rho1(double dt, double sigma, std::uint64_t seed, std::uint64_t stream = 0,
                              std::optional<double> t0 = std::nullopt, bool record_path = false)
{
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    const double L = 1.0 / sigma;
    const auto cap = static_cast<std::size_t>(std::ceil(kRhoHorizonFactor * L * L / dt));
    const std::optional<std::size_t> k0 =
        t0 ? std::optional<std::size_t>(static_cast<std::size_t>(std::llround(*t0 / dt))) : std::nullopt;
    Stream rng(seed, stream);
    Rho1Sample out;
    if (record_path) out.path = ContinuumPath{PathKind::bessel3, dt, seed, {0.0}};
    const double s = std::sqrt(dt);
    double x = 0.0, y = 0.0, z = 0.0, r = 0.0;
    for (std::size_t k = 0; k < cap; ++k) {
        x += s * rng.normal();
        y += s * rng.normal();
        z += s * rng.normal();
        const double r1 = std::sqrt(x * x + y * y + z * z);
        const double t_prev = static_cast<double>(k) * dt;
        std::optional<double> hit;
        if (r1 >= L) {
            hit = t_prev + dt * (L - r) / (r1 - r);
        } else {
            const double p = std::exp(-2.0 * (L - r) * (L - r1) / dt);
            if (p > 1e-14 && rng.uniform() < p) hit = t_prev + 0.5 * dt;
        }
        if (hit) {
            out.rho = *hit;
            if (k0 && !out.stopped_at_t0) out.stopped_at_t0 = L;
            if (record_path) out.path->values.push_back(L);
            return out;
        }
        r = r1;
        if (k0 && k + 1 == *k0) out.stopped_at_t0 = r;
        if (record_path) out.path->values.push_back(r);
    }
    throw std::runtime_error("sample_rho1: no crossing within " + std::to_string(kRhoHorizonFactor) + " L^2");
}

// ---------------------------------------------------------------------------
// Closed forms.

/// sqrt(2/pi) * int_0^x exp(-u^2/2) du = erf(x / sqrt 2); +inf gives 1.
inline double normal_integral(double x)
{
    if (std::isnan(x) || x < 0.0) throw std::domain_error("normal_integral needs x >= 0");
    if (std::isinf(x)) return 1.0;
    return std::erf(x / std::numbers::sqrt2);
}

/// Meander density at time t from (0, 0):
/// t^{-3/2} y exp(-y^2 / 2t) N(y / sqrt(1 - t)), with q(1, y) = y exp(-y^2 / 2).
inline double q_density(double t, double y)
{
    if (!(t > 0.0) || t > 1.0) throw std::domain_error("q_density needs 0 < t <= 1");
    if (std::isnan(y) || y < 0.0) throw std::domain_error("q_density needs y >= 0");
    if (std::isinf(y)) return 0.0;
    if (t == 1.0) return y * std::exp(-0.5 * y * y);
    return std::pow(t, -1.5) * y * std::exp(-0.5 * y * y / t) * normal_integral(y / std::sqrt(1.0 - t));
}

/// int_0^x q(t, y) dy in closed form (integrate by parts once):
/// erf(x / sqrt(2t(1-t))) - t^{-1/2} exp(-x^2 / 2t) erf(x / sqrt(2(1-t))).
inline double meander_cdf(double t, double x)
{
    if (!(t > 0.0) || t > 1.0) throw std::domain_error("meander_cdf needs 0 < t <= 1");
    if (std::isnan(x)) throw std::domain_error("meander_cdf of NaN");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (t == 1.0) return -std::expm1(-0.5 * x * x);
    const double s = 1.0 - t;
    return std::erf(x / std::sqrt(2.0 * t * s)) - std::exp(-0.5 * x * x / t) / std::sqrt(t) * std::erf(x / std::sqrt(2.0 * s));
}

/// (1/3) ((c + delta) / (c - a))^{1/2} (a + delta)^{-3/2}, a bound for
/// P[sup_{s <= a + delta} W+_{c + delta}(s) < 1].
inline double meander_sup_tail(double a, double c, double delta)
{
    if (!(a >= 0.0) || !(c > 2.0 * a) || !(delta > 0.0))
        throw std::domain_error("meander_sup_tail needs c > 2a >= 0 and delta > 0");
    return std::sqrt((c + delta) / (c - a)) * std::pow(a + delta, -1.5) / 3.0;
}

// ---------------------------------------------------------------------------
// CSV emission: one JSON header line prefixed by '#', then "t,value" rows.

inline void write_path_csv(std::ostream& out, const ContinuumPath& p)
{
    const nlohmann::json header{{"kind", to_string(p.kind)}, {"dt", p.dt}, {"seed", p.seed}};
    out << "# " << header.dump() << "\nt,value\n";
    char buf[64];
    for (std::size_t k = 0; k < p.values.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.time(k), p.values[k]);
        out << buf;
    }
}

} // namespace rwre
