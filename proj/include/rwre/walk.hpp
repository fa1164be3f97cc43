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
#include <cstring>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/linalg.hpp"
#include "rwre/parallel.hpp"
#include "rwre/rng.hpp"

namespace rwre {

struct WalkPath {
    Site start = 0;
    std::vector<Site> positions; // X_0 .. X_m
    std::string env_id;
    std::uint64_t seed = 0;

    std::size_t steps() const { return positions.empty() ? 0 : positions.size() - 1; }
};

/// m steps of the quenched chain from `start`. Sample `stream` of `seed`.
inline WalkPath simulate(const TransitionKernel& kernel, Site start, std::size_t m, std::uint64_t seed,
                         std::uint64_t stream = 0)
{
    Stream rng(seed, stream);
    WalkPath path;
    path.start = start;
    path.seed = seed;
    path.positions.reserve(m + 1);
    path.positions.push_back(start);
    Site x = start;
    for (std::size_t k = 0; k < m; ++k) {
        x = kernel.step(x, rng.uniform());
        path.positions.push_back(x);
    }
    return path;
}

inline WalkPath simulate(const Environment& env, Site start, std::size_t m, std::uint64_t seed)
{
    return simulate(TransitionKernel(env), start, m, seed);
}

/// tau_A = inf{k >= 0 : X_k in A}, or with `strict_positive_entry`
/// tau+_A = inf{k >= 1 : X_k in A}.
template <class Pred>
std::optional<std::size_t> stopping_time(std::span<const Site> path, Pred&& in_set, bool strict_positive_entry)
{
    for (std::size_t k = strict_positive_entry ? 1 : 0; k < path.size(); ++k)
        if (in_set(path[k])) return k;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Survival of the positive half-line.

/// h(k, x) = P^x[remaining n-k steps stay in (0, W]] for x in [1, W], with
/// exits above W counted as failures (the certified lower bound).
class SurvivalTable {
public:
    SurvivalTable() = default;
    SurvivalTable(std::size_t n, Site W, std::vector<double> origin_row, std::vector<double> h)
        : n_(n)
        , W_(W)
        , origin_row_(std::move(origin_row))
        , h_(std::move(h))
    {
        if (h_.size() != (n_ + 1) * static_cast<std::size_t>(W_)) throw std::invalid_argument("survival table size");
    }

    std::size_t n() const { return n_; }
    Site W() const { return W_; }

    double at(std::size_t k, Site x) const
    {
        if (x < 1 || x > W_) return 0.0;
        return h_[k * static_cast<std::size_t>(W_) + static_cast<std::size_t>(x - 1)];
    }

    std::span<const double> level(std::size_t k) const
    {
        return {h_.data() + k * static_cast<std::size_t>(W_), static_cast<std::size_t>(W_)};
    }

    /// p(0, y) for y = 1..R; first step from the origin.
    const std::vector<double>& origin_row() const { return origin_row_; }

    /// P[Lambda_r] (lower bound) for any r <= n, read off the same table since
    /// the remaining-horizon recursion does not depend on n.
    double survival(std::size_t r) const
    {
        if (r > n_) throw std::out_of_range("horizon beyond table");
        if (r == 0) return 1.0;
        const std::size_t k = n_ - r + 1;
        double acc = 0.0;
        for (std::size_t j = 0; j < origin_row_.size(); ++j) acc += origin_row_[j] * at(k, static_cast<Site>(j + 1));
        return acc;
    }

    const std::vector<double>& raw() const { return h_; }

    bool operator==(const SurvivalTable&) const = default;

private:
    std::size_t n_ = 0;
    Site W_ = 0;
    std::vector<double> origin_row_;
    std::vector<double> h_;
};

struct SurvivalResult {
    double lower = 1.0;
    double upper = 1.0;
    Site W = 0;
    bool certified = true;
    SurvivalTable table;

    double value() const { return lower; }
    double bracket() const { return upper - lower; }
};

inline constexpr double kSurvivalBracketTolerance = 1e-10;

/// Default truncation ceil(8 sqrt(n ln(n+1))).
inline Site default_survival_window(std::size_t n)
{
    const double nn = static_cast<double>(std::max<std::size_t>(n, 1));
    return static_cast<Site>(std::ceil(8.0 * std::sqrt(nn * std::log(nn + 1.0))));
}

namespace detail {

inline SurvivalResult survival_fixed_window(const TransitionKernel& kernel, std::size_t n, Site W)
{
    const int R = kernel.R();
    if (W < 1) throw std::invalid_argument("survival window must be at least 1");
    kernel.require(0);
    kernel.require(W);
    const auto w = static_cast<std::size_t>(W);

    std::vector<double> origin_row(static_cast<std::size_t>(R));
    for (int y = 1; y <= R; ++y) origin_row[static_cast<std::size_t>(y - 1)] = kernel.p(0, y);

    std::vector<double> h((n + 1) * w, 0.0);
    std::fill(h.begin() + static_cast<std::ptrdiff_t>(n * w), h.end(), 1.0);
    std::vector<double> upper_next(w, 1.0);
    std::vector<double> upper_cur(w, 0.0);
    std::vector<double> upper_row1 = upper_next;

    for (std::size_t k = n; k-- > 0;) {
        const double* next = h.data() + (k + 1) * w;
        double* cur = h.data() + k * w;
        for (Site x = 1; x <= W; ++x) {
            const auto probs = kernel.probabilities(x);
            double lo = 0.0;
            double up = 0.0;
            for (int j = 0; j < kernel.width(); ++j) {
                const Site y = x + kernel.jump(j);
                if (y < 1) continue;
                if (y > W) {
                    up += probs[static_cast<std::size_t>(j)];
                    continue;
                }
                lo += probs[static_cast<std::size_t>(j)] * next[y - 1];
                up += probs[static_cast<std::size_t>(j)] * upper_next[static_cast<std::size_t>(y - 1)];
            }
            cur[x - 1] = lo;
            upper_cur[static_cast<std::size_t>(x - 1)] = up;
        }
        std::swap(upper_cur, upper_next);
        if (k == 1) upper_row1 = upper_next;
    }

    SurvivalResult res;
    res.W = W;
    if (n == 0) {
        res.lower = res.upper = 1.0;
    } else {
        res.lower = 0.0;
        res.upper = 0.0;
        for (int y = 1; y <= R; ++y) {
            const double p = origin_row[static_cast<std::size_t>(y - 1)];
            if (y > W) {
                res.upper += p;
                continue;
            }
            res.lower += p * h[w + static_cast<std::size_t>(y - 1)];
            res.upper += p * upper_row1[static_cast<std::size_t>(y - 1)];
        }
    }
    res.certified = res.upper - res.lower < kSurvivalBracketTolerance;
    res.table = SurvivalTable(n, W, std::move(origin_row), std::move(h));
    return res;
}

} // namespace detail

/// P_omega[X_k > 0, k = 1..n] by backward recursion on (0, W]. Returns the
/// absorbing-to-0 lower bound, the absorbing-to-1 upper bound, and the table.
/// W = 0 selects the default window and doubles it (while the environment
/// allows) until the bracket is below 1e-10.
inline SurvivalResult survival_probability(const TransitionKernel& kernel, std::size_t n, Site W = 0)
{
    if (W > 0) return detail::survival_fixed_window(kernel, n, W);
    W = std::min(std::max<Site>(default_survival_window(n), kernel.R()), kernel.last());
    auto res = detail::survival_fixed_window(kernel, n, W);
    while (!res.certified && 2 * W <= kernel.last()) {
        W *= 2;
        res = detail::survival_fixed_window(kernel, n, W);
    }
    return res;
}

inline SurvivalResult survival_probability(const Environment& env, std::size_t n, Site W = 0)
{
    return survival_probability(TransitionKernel(env), n, W);
}

/// Conditioned one-step law under Q^n at time k from x (Doob transform by
/// the space-time harmonic function h). Targets with zero weight are omitted.
inline std::vector<std::pair<Site, double>> meander_step_law(const TransitionKernel& kernel, const SurvivalTable& table,
                                                             std::size_t k, Site x)
{
    if (k >= table.n()) throw std::out_of_range("meander step beyond horizon");
    std::vector<std::pair<Site, double>> law;
    double total = 0.0;
    const auto probs = kernel.probabilities(x);
    for (int j = 0; j < kernel.width(); ++j) {
        const Site y = x + kernel.jump(j);
        const double w = probs[static_cast<std::size_t>(j)] * table.at(k + 1, y);
        if (w > 0.0) {
            law.emplace_back(y, w);
            total += w;
        }
    }
    if (!(total > 0.0)) throw std::logic_error("degenerate survival table: h vanishes at the current state");
    for (auto& [y, w] : law) w /= total;
    return law;
}

namespace detail {

// One conditioned step using the weights p(x,y) * g(y) restricted to g > 0.
template <class G>
Site doob_step(const TransitionKernel& kernel, Site x, double u, G&& g)
{
    const auto probs = kernel.probabilities(x);
    double weights[128];
    const int width = kernel.width();
    if (width > 128) throw std::invalid_argument("R_max too large for conditioned sampling");
    double total = 0.0;
    for (int j = 0; j < width; ++j) {
        const double w = probs[static_cast<std::size_t>(j)] * g(x + kernel.jump(j));
        weights[j] = w;
        total += w;
    }
    if (!(total > 0.0)) throw std::logic_error("degenerate h-transform: no admissible step");
    const double target = u * total;
    double acc = 0.0;
    int last_positive = -1;
    for (int j = 0; j < width; ++j) {
        if (weights[j] <= 0.0) continue;
        last_positive = j;
        acc += weights[j];
        if (target < acc) return x + kernel.jump(j);
    }
    return x + kernel.jump(last_positive);
}

} // namespace detail

/// Exact draw from P_omega[. | Lambda_n]; every X_k, k = 1..n, is positive.
inline WalkPath conditioned_sample_meander(const TransitionKernel& kernel, const SurvivalTable& table, std::uint64_t seed,
                                           std::uint64_t stream = 0)
{
    Stream rng(seed, stream);
    WalkPath path;
    path.seed = seed;
    path.positions.reserve(table.n() + 1);
    path.positions.push_back(0);
    Site x = 0;
    for (std::size_t k = 0; k < table.n(); ++k) {
        x = detail::doob_step(kernel, x, rng.uniform(), [&](Site y) { return table.at(k + 1, y); });
        path.positions.push_back(x);
    }
    return path;
}

/// Draws `count` conditioned paths (sample i uses stream i) and hands each to
/// fn(i, path). fn must only write to slot i of its own outputs.
template <class Fn>
void for_each_meander(const TransitionKernel& kernel, const SurvivalTable& table, std::size_t count, std::uint64_t seed,
                      unsigned jobs, Fn&& fn)
{
    parallel_for(count, jobs, [&](std::size_t i) {
        const WalkPath path = conditioned_sample_meander(kernel, table, seed, i);
        fn(i, path);
    });
}

// ---------------------------------------------------------------------------
// Crossing of (0, N).

/// h(x) = P^x[tau_E < tau_B], B = (-inf, 0], E = [N, inf).
class HarmonicTable {
public:
    HarmonicTable() = default;
    HarmonicTable(Site N, std::vector<double> interior, double crossing_probability)
        : N_(N)
        , interior_(std::move(interior))
        , crossing_probability_(crossing_probability)
    {
        if (interior_.size() != static_cast<std::size_t>(N_ - 1)) throw std::invalid_argument("harmonic table size");
    }

    Site N() const { return N_; }

    /// Extended by 0 on B and 1 on E.
    double value(Site x) const
    {
        if (x <= 0) return 0.0;
        if (x >= N_) return 1.0;
        return interior_[static_cast<std::size_t>(x - 1)];
    }

    const std::vector<double>& interior() const { return interior_; }

    /// P_omega[tau_E < tau+_B] from the origin.
    double crossing_probability() const { return crossing_probability_; }

    bool operator==(const HarmonicTable&) const = default;

private:
    Site N_ = 0;
    std::vector<double> interior_;
    double crossing_probability_ = 0.0;
};

namespace detail {

// (I - P) restricted to the interior (0, N); site x <-> row x - 1.
inline linalg::BandMatrix interior_generator(const TransitionKernel& kernel, Site N)
{
    const auto n = static_cast<std::size_t>(N - 1);
    linalg::BandMatrix a(n, static_cast<std::size_t>(kernel.R()));
    for (Site x = 1; x < N; ++x) {
        const auto i = static_cast<std::size_t>(x - 1);
        a.at(i, i) = 1.0;
        for (int j = 0; j < kernel.width(); ++j) {
            const Site y = x + kernel.jump(j);
            if (y >= 1 && y < N) a.at(i, static_cast<std::size_t>(y - 1)) -= kernel.p(x, y);
        }
    }
    return a;
}

inline void require_interval(const TransitionKernel& kernel, Site N)
{
    if (N < 2) throw std::invalid_argument("N must be at least 2");
    kernel.require(0);
    kernel.require(N - 1);
}

} // namespace detail

inline HarmonicTable harmonic_hit(const TransitionKernel& kernel, Site N,
                                  linalg::Method method = linalg::Method::automatic)
{
    detail::require_interval(kernel, N);
    std::vector<double> b(static_cast<std::size_t>(N - 1), 0.0);
    for (Site x = 1; x < N; ++x)
        for (int j = 0; j < kernel.width(); ++j) {
            const Site y = x + kernel.jump(j);
            if (y >= N) b[static_cast<std::size_t>(x - 1)] += kernel.p(x, y);
        }
    auto h = linalg::solve(detail::interior_generator(kernel, N), b, method);
    double from_origin = 0.0;
    for (int j = 0; j < kernel.width(); ++j) {
        const Site y = kernel.jump(j);
        if (y >= N) from_origin += kernel.p(0, y);
        else if (y > 0) from_origin += kernel.p(0, y) * h[static_cast<std::size_t>(y - 1)];
    }
    return HarmonicTable(N, std::move(h), from_origin);
}

inline HarmonicTable harmonic_hit(const Environment& env, Site N) { return harmonic_hit(TransitionKernel(env), N); }

/// E_omega[tau+_B ^ tau_E] from the origin: one step plus the interior time.
inline double expected_exit_time(const TransitionKernel& kernel, Site N,
                                 linalg::Method method = linalg::Method::automatic)
{
    detail::require_interval(kernel, N);
    const auto m = linalg::solve(detail::interior_generator(kernel, N),
                                 std::vector<double>(static_cast<std::size_t>(N - 1), 1.0), method);
    double e = 1.0;
    for (int y = 1; y <= kernel.R() && y < N; ++y) e += kernel.p(0, y) * m[static_cast<std::size_t>(y - 1)];
    return e;
}

/// Law of the overshoot site X_{tau_E} given the crossing event, from the
/// origin: pairs (y, P[X_{tau_E} = y | tau_E < tau+_B]) for y in [N, N + R).
inline std::vector<std::pair<Site, double>> exit_distribution(const TransitionKernel& kernel, Site N)
{
    detail::require_interval(kernel, N);
    const int R = kernel.R();
    std::vector<std::vector<double>> rhs(static_cast<std::size_t>(R), std::vector<double>(static_cast<std::size_t>(N - 1)));
    for (Site x = 1; x < N; ++x)
        for (int r = 0; r < R; ++r) rhs[static_cast<std::size_t>(r)][static_cast<std::size_t>(x - 1)] = kernel.p(x, N + r);
    const auto sol = linalg::solve(detail::interior_generator(kernel, N), rhs);
    std::vector<std::pair<Site, double>> law;
    double total = 0.0;
    for (int r = 0; r < R; ++r) {
        const Site target = N + r;
        double p = kernel.p(0, target);
        for (int y = 1; y <= R && y < N; ++y) p += kernel.p(0, y) * sol[static_cast<std::size_t>(r)][static_cast<std::size_t>(y - 1)];
        law.emplace_back(target, p);
        total += p;
    }
    for (auto& [y, p] : law) p /= total;
    return law;
}

/// Conditioned one-step law under P_omega[. | tau_E < tau+_B] from x in [0, N).
inline std::vector<std::pair<Site, double>> crossing_step_law(const TransitionKernel& kernel, const HarmonicTable& table,
                                                              Site x)
{
    std::vector<std::pair<Site, double>> law;
    double total = 0.0;
    const auto probs = kernel.probabilities(x);
    for (int j = 0; j < kernel.width(); ++j) {
        const Site y = x + kernel.jump(j);
        const double w = probs[static_cast<std::size_t>(j)] * table.value(y);
        if (w > 0.0) {
            law.emplace_back(y, w);
            total += w;
        }
    }
    if (!(total > 0.0)) throw std::logic_error("degenerate harmonic table");
    for (auto& [y, w] : law) w /= total;
    return law;
}

/// Exact draw from P_omega[. | tau_E < tau+_B], run until X enters [N, inf);
/// the last position is the overshoot site X_{tau_E}.
inline WalkPath conditioned_sample_crossing(const TransitionKernel& kernel, const HarmonicTable& table,
                                            std::uint64_t seed, std::uint64_t stream = 0)
{
    Stream rng(seed, stream);
    WalkPath path;
    path.seed = seed;
    path.positions.push_back(0);
    Site x = 0;
    const auto h = [&](Site y) { return table.value(y); };
    while (x < table.N()) {
        x = detail::doob_step(kernel, x, rng.uniform(), h);
        path.positions.push_back(x);
    }
    return path;
}

// ---------------------------------------------------------------------------
// Diffusive rescaling.

/// Polygonal path t -> X_{floor(nt)} + (nt - floor(nt)) (X_{floor(nt)+1} - X_{floor(nt)}),
/// divided by sigma sqrt(n). Optionally frozen from `freeze_time` on.
class RescaledPath {
public:
    RescaledPath(double n, double sigma, std::vector<double> values)
        : n_(n)
        , sigma_(sigma)
        , values_(std::move(values))
    {}

    double n() const { return n_; }
    double sigma() const { return sigma_; }
    const std::vector<double>& values() const { return values_; }
    double time(std::size_t k) const { return static_cast<double>(k) / n_; }
    double end_time() const { return values_.empty() ? 0.0 : time(values_.size() - 1); }

    std::optional<double> freeze_time() const { return freeze_time_; }

    void freeze_from(double t, double value)
    {
        freeze_time_ = t;
        freeze_value_ = value;
    }

    double at(double t) const
    {
        if (freeze_time_ && t >= *freeze_time_) return freeze_value_;
        if (values_.empty()) throw std::logic_error("empty rescaled path");
        if (t <= 0.0) return values_.front();
        const double s = t * n_;
        const double fl = std::floor(s);
        const auto k = static_cast<std::size_t>(fl);
        if (k + 1 >= values_.size()) return values_.back();
        return values_[k] + (s - fl) * (values_[k + 1] - values_[k]);
    }

private:
    double n_;
    double sigma_;
    std::vector<double> values_;
    std::optional<double> freeze_time_;
    double freeze_value_ = 0.0;
};

inline RescaledPath rescale(std::span<const Site> positions, double n, double sigma)
{
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(n > 0.0)) throw std::invalid_argument("n must be positive");
    const double scale = 1.0 / (sigma * std::sqrt(n));
    std::vector<double> v;
    v.reserve(positions.size());
    for (Site x : positions) v.push_back(static_cast<double>(x) * scale);
    return RescaledPath(n, sigma, std::move(v));
}

inline RescaledPath rescale(const WalkPath& path, double n, double sigma) { return rescale(path.positions, n, sigma); }

struct CrossingFunctionals {
    double T = 0.0; // first time the polygonal Z^{n^2} reaches 1/sigma
    RescaledPath Y;  // Z^{n^2} stopped at T
};

/// (T_n, Y^n) for a path run on the diffusive clock n^2; level 1/sigma of
/// Z^{n^2} is level n of X.
inline CrossingFunctionals crossing_functionals(std::span<const Site> positions, std::size_t n, double sigma)
{
    const double clock = static_cast<double>(n) * static_cast<double>(n);
    const auto level = static_cast<Site>(n);
    std::optional<double> T;
    for (std::size_t k = 0; k < positions.size(); ++k) {
        if (positions[k] < level) continue;
        if (k == 0) {
            T = 0.0;
        } else {
            const double prev = static_cast<double>(positions[k - 1]);
            const double frac = (static_cast<double>(level) - prev) / (static_cast<double>(positions[k]) - prev);
            T = (static_cast<double>(k - 1) + frac) / clock;
        }
        break;
    }
    if (!T) throw std::invalid_argument("path never reaches level n");
    RescaledPath y = rescale(positions, clock, sigma);
    y.freeze_from(*T, 1.0 / sigma);
    return {*T, std::move(y)};
}

inline CrossingFunctionals crossing_functionals(const WalkPath& path, std::size_t n, double sigma)
{
    return crossing_functionals(path.positions, n, sigma);
}

// ---------------------------------------------------------------------------
// Diffusivity.

struct SigmaEstimate {
    double sigma = 0.0;
    double stderr_ = 0.0;
};

/// sigma^2 = slope of Var(X_k) against k on [n_fit/2, n_fit] (least squares
/// through the origin), with a grouped jackknife over runs.
inline SigmaEstimate estimate_sigma(const TransitionKernel& kernel, std::size_t n_fit, std::size_t m_runs,
                                    std::uint64_t seed, unsigned jobs = 1, std::size_t groups = 20)
{
    if (n_fit < 2 || m_runs < 2 * groups) throw std::invalid_argument("estimate_sigma: too few steps or runs");
    const std::size_t k0 = n_fit / 2;
    const std::size_t width = n_fit - k0 + 1;
    std::vector<std::vector<double>> s1(groups, std::vector<double>(width, 0.0));
    std::vector<std::vector<double>> s2(groups, std::vector<double>(width, 0.0));
    std::vector<std::size_t> counts(groups, 0);

    parallel_for(groups, jobs, [&](std::size_t g) {
        const std::size_t lo = m_runs * g / groups;
        const std::size_t hi = m_runs * (g + 1) / groups;
        for (std::size_t r = lo; r < hi; ++r) {
            Stream rng(seed, r);
            Site x = 0;
            for (std::size_t k = 1; k <= n_fit; ++k) {
                x = kernel.step(x, rng.uniform());
                if (k >= k0) {
                    const double v = static_cast<double>(x);
                    s1[g][k - k0] += v;
                    s2[g][k - k0] += v * v;
                }
            }
        }
        counts[g] = hi - lo;
    });

    const auto fit = [&](std::optional<std::size_t> skip) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < width; ++i) {
            double a = 0.0;
            double b = 0.0;
            double m = 0.0;
            for (std::size_t g = 0; g < groups; ++g) {
                if (skip && *skip == g) continue;
                a += s1[g][i];
                b += s2[g][i];
                m += static_cast<double>(counts[g]);
            }
            const double var = (b - a * a / m) / (m - 1.0);
            const double k = static_cast<double>(k0 + i);
            num += k * var;
            den += k * k;
        }
        return std::sqrt(std::max(num / den, 0.0));
    };

    SigmaEstimate est;
    est.sigma = fit(std::nullopt);
    std::vector<double> loo(groups);
    double mean = 0.0;
    for (std::size_t g = 0; g < groups; ++g) {
        loo[g] = fit(g);
        mean += loo[g];
    }
    mean /= static_cast<double>(groups);
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    est.stderr_ = std::sqrt(ss * static_cast<double>(groups - 1) / static_cast<double>(groups));
    return est;
}

// ---------------------------------------------------------------------------
// Binary table dumps: magic, format version, header, raw IEEE doubles.

inline constexpr std::uint32_t kTableFormatVersion = 1;

namespace detail {

template <class T>
void put(std::ostream& out, const T& v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in)
{
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("truncated table dump");
    return v;
}

inline void put_doubles(std::ostream& out, const std::vector<double>& v)
{
    put<std::uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline std::vector<double> get_doubles(std::istream& in)
{
    const auto n = get<std::uint64_t>(in);
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("truncated table dump");
    return v;
}

inline void put_magic(std::ostream& out, const char (&magic)[9])
{
    out.write(magic, 8);
    put<std::uint32_t>(out, kTableFormatVersion);
}

inline void expect_magic(std::istream& in, const char (&magic)[9])
{
    char buf[8];
    in.read(buf, 8);
    if (!in || std::memcmp(buf, magic, 8) != 0) throw std::runtime_error("not a table dump of the expected kind");
    if (get<std::uint32_t>(in) != kTableFormatVersion) throw std::runtime_error("unsupported table format version");
}

} // namespace detail

inline void write_table(std::ostream& out, const SurvivalTable& t)
{
    detail::put_magic(out, "RWRESURV");
    detail::put<std::uint64_t>(out, t.n());
    detail::put<std::int64_t>(out, t.W());
    detail::put_doubles(out, t.origin_row());
    detail::put_doubles(out, t.raw());
}

inline SurvivalTable read_survival_table(std::istream& in)
{
    detail::expect_magic(in, "RWRESURV");
    const auto n = detail::get<std::uint64_t>(in);
    const auto W = detail::get<std::int64_t>(in);
    auto origin = detail::get_doubles(in);
    auto h = detail::get_doubles(in);
    return SurvivalTable(n, W, std::move(origin), std::move(h));
}

inline void write_table(std::ostream& out, const HarmonicTable& t)
{
    detail::put_magic(out, "RWREHARM");
    detail::put<std::int64_t>(out, t.N());
    detail::put<double>(out, t.crossing_probability());
    detail::put_doubles(out, t.interior());
}

inline HarmonicTable read_harmonic_table(std::istream& in)
{
    detail::expect_magic(in, "RWREHARM");
    const auto N = detail::get<std::int64_t>(in);
    const auto p = detail::get<double>(in);
    auto h = detail::get_doubles(in);
    return HarmonicTable(N, std::move(h), p);
}

} // namespace rwre
