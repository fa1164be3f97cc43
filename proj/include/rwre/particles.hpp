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
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "rwre/network.hpp"
#include "rwre/rng.hpp"

namespace rwre {

/// Occupation numbers over sites 0..N.
struct ParticleConfig {
    std::vector<int> occupation;

    int total() const
    {
        int s = 0;
        for (int v : occupation) s += v;
        return s;
    }

    bool operator==(const ParticleConfig&) const = default;
};

/// Injection/absorption system on the two-sided collapsed network. Particles
/// enter from reservoir b in {0, N} at rate lambda_b and land on j with
/// probability q(b, j); a particle at i jumps along q and is removed when it
/// lands on 0 or N. Interior moves are i -> j with i, j in (0, N).
struct ParticleSystemSpec {
    Site N = 0;
    std::vector<double> mass; // C3_x, x = 0..N
    std::vector<double> q;    // row-major (N+1) x (N+1)
    double lambda0 = 0.0;
    double lambdaN = 0.0;

    std::size_t sites() const { return static_cast<std::size_t>(N + 1); }
    double rate(Site x, Site y) const { return q[static_cast<std::size_t>(x) * sites() + static_cast<std::size_t>(y)]; }
    bool interior(Site x) const { return x > 0 && x < N; }
};

inline ParticleSystemSpec particle_system(const NetworkReduction& red)
{
    require_kind(red, ReductionKind::omega3);
    ParticleSystemSpec s;
    s.N = red.N();
    s.mass.resize(s.sites());
    s.q.assign(s.sites() * s.sites(), 0.0);
    for (Site x = 0; x <= s.N; ++x) {
        s.mass[static_cast<std::size_t>(x)] = red.mass(x);
        for (Site y = 0; y <= s.N; ++y) s.q[static_cast<std::size_t>(x) * s.sites() + static_cast<std::size_t>(y)] = red.q(x, y);
    }
    s.lambda0 = red.mass(0);
    s.lambdaN = red.mass(s.N);
    return s;
}

/// L(eta, eta'): the rate of the single transition eta -> eta', 0 if none.
inline double particle_rates(const ParticleSystemSpec& spec, const ParticleConfig& eta, const ParticleConfig& next)
{
    if (eta.occupation.size() != spec.sites() || next.occupation.size() != spec.sites())
        throw std::invalid_argument("configuration size does not match N + 1");
    int plus = -1;
    int minus = -1;
    for (std::size_t i = 0; i < spec.sites(); ++i) {
        const int d = next.occupation[i] - eta.occupation[i];
        if (d == 0) continue;
        if (d == 1 && plus < 0) plus = static_cast<int>(i);
        else if (d == -1 && minus < 0) minus = static_cast<int>(i);
        else return 0.0;
    }
    const Site N = spec.N;
    if (plus >= 0 && minus < 0) return spec.lambda0 * spec.rate(0, plus) + spec.lambdaN * spec.rate(N, plus);
    if (minus >= 0 && plus < 0)
        return eta.occupation[static_cast<std::size_t>(minus)] * (spec.rate(minus, 0) + spec.rate(minus, N));
    if (plus >= 0 && minus >= 0 && spec.interior(plus) && spec.interior(minus))
        return eta.occupation[static_cast<std::size_t>(minus)] * spec.rate(minus, plus);
    return 0.0;
}

/// log of the product of Poisson(C3_i) laws.
inline double log_product_poisson(const ParticleSystemSpec& spec, const ParticleConfig& eta)
{
    double s = 0.0;
    for (std::size_t i = 0; i < spec.sites(); ++i) {
        const double c = spec.mass[i];
        const int k = eta.occupation[i];
        s += -c + k * std::log(c) - std::lgamma(k + 1.0);
    }
    return s;
}

struct ReversibilityReport {
    std::size_t configurations = 0;
    std::size_t pairs = 0;
    double max_violation = 0.0;
    double max_relative_violation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

inline constexpr std::size_t kMaxEnumeratedConfigurations = 2'000'000;

namespace detail {

inline void enumerate_configs(std::size_t sites, int cap, const std::function<void(const ParticleConfig&)>& fn)
{
    ParticleConfig eta{std::vector<int>(sites, 0)};
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i == sites) {
            fn(eta);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            eta.occupation[i] = k;
            rec(i + 1, left - k);
        }
        eta.occupation[i] = 0;
    };
    rec(0, cap);
}

inline double binomial(double n, double k) { return std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1)); }

} // namespace detail

/// Detailed balance L(eta, eta') mu(eta) = L(eta', eta) mu(eta') over every
/// pair of configurations with at most max_particles particles that differ by
/// one injection, removal or interior move.
inline ReversibilityReport check_reversibility(const ParticleSystemSpec& spec, int max_particles, double tol)
{
    const double count = detail::binomial(static_cast<double>(max_particles) + static_cast<double>(spec.sites()),
                                          static_cast<double>(spec.sites()));
    if (count > static_cast<double>(kMaxEnumeratedConfigurations))
        throw std::invalid_argument("particle enumeration cap exceeded");
    ReversibilityReport rep;
    rep.tolerance = tol;
    const auto check_pair = [&](const ParticleConfig& a, const ParticleConfig& b) {
        if (b.total() > max_particles) return;
        const double forward = particle_rates(spec, a, b) * std::exp(log_product_poisson(spec, a));
        const double backward = particle_rates(spec, b, a) * std::exp(log_product_poisson(spec, b));
        const double v = std::abs(forward - backward);
        const double scale = std::max(std::abs(forward), std::abs(backward));
        rep.max_violation = std::max(rep.max_violation, v);
        if (scale > 0.0) rep.max_relative_violation = std::max(rep.max_relative_violation, v / scale);
        ++rep.pairs;
    };
    detail::enumerate_configs(spec.sites(), max_particles, [&](const ParticleConfig& eta) {
        ++rep.configurations;
        ParticleConfig next = eta;
        for (std::size_t i = 0; i < spec.sites(); ++i) {
            ++next.occupation[i];
            check_pair(eta, next);
            --next.occupation[i];
            if (eta.occupation[i] == 0) continue;
            --next.occupation[i];
            check_pair(eta, next);
            for (std::size_t j = 0; j < spec.sites(); ++j) {
                if (j == i) continue;
                ++next.occupation[j];
                check_pair(eta, next);
                --next.occupation[j];
            }
            ++next.occupation[i];
        }
    });
    rep.pass = rep.max_violation <= tol;
    return rep;
}

inline nlohmann::json to_json(const ReversibilityReport& r)
{
    return {{"configurations", r.configurations}, {"pairs", r.pairs},       {"max_violation", r.max_violation},
            {"max_relative_violation", r.max_relative_violation}, {"tolerance", r.tolerance}, {"pass", r.pass}};
}

// ---------------------------------------------------------------------------
// M/G/inf queue: injection at 0 only, each customer performs the
// continuous-time walk (unit-rate holding, jumps along q) until it lands on
// 0 or N.

struct QueueReport {
    double E_T_hat = 0.0;
    double E_T_stderr = 0.0;
    double E_R_hat = 0.0;
    double E_R_stderr = 0.0;
    double lambda0 = 0.0;
    double horizon = 0.0;
    double burn_in = 0.0;
    std::size_t customers = 0;
};

inline constexpr std::size_t kQueueBatches = 20;

namespace detail {

inline double customer_lifetime(const ParticleSystemSpec& spec, const std::vector<double>& cumulative, Stream& rng)
{
    Site x = 0;
    double t = 0.0;
    const std::size_t n = spec.sites();
    for (;;) {
        t += rng.exponential(1.0);
        const double* row = cumulative.data() + static_cast<std::size_t>(x) * n;
        const double u = rng.uniform() * row[n - 1];
        std::size_t y = 0;
        while (y + 1 < n && row[y] <= u) ++y;
        while (y > 0 && spec.rate(x, static_cast<Site>(y)) == 0.0) --y;
        x = static_cast<Site>(y);
        if (x == 0 || x == spec.N) return t;
    }
}

} // namespace detail

/// Event-driven run on [0, horizon]; statistics use [burn_in, horizon] with
/// burn_in = horizon / 10 unless given.
inline QueueReport simulate_queue(const ParticleSystemSpec& spec, double horizon, std::uint64_t seed,
                                  double burn_in = -1.0, std::uint64_t replica = 0)
{
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (burn_in < 0.0) burn_in = horizon / 10.0;
    if (burn_in >= horizon) throw std::invalid_argument("burn-in must be shorter than the horizon");

    const std::size_t n = spec.sites();
    std::vector<double> cumulative(n * n);
    for (std::size_t x = 0; x < n; ++x) {
        double acc = 0.0;
        for (std::size_t y = 0; y < n; ++y) cumulative[x * n + y] = acc += spec.q[x * n + y];
    }

    Stream rng(seed, replica);
    QueueReport rep;
    rep.lambda0 = spec.lambda0;
    rep.horizon = horizon;
    rep.burn_in = burn_in;

    const double batch_len = (horizon - burn_in) / static_cast<double>(kQueueBatches);
    std::vector<double> batch_area(kQueueBatches, 0.0);
    const auto accumulate = [&](double t0, double t1, std::size_t count) {
        t0 = std::max(t0, burn_in);
        t1 = std::min(t1, horizon);
        while (t0 < t1 && count > 0) {
            auto b = static_cast<std::size_t>((t0 - burn_in) / batch_len);
            b = std::min(b, kQueueBatches - 1);
            const double end = std::min(t1, burn_in + static_cast<double>(b + 1) * batch_len);
            batch_area[b] += static_cast<double>(count) * (end - t0);
            if (end <= t0) break;
            t0 = end;
        }
    };

    std::priority_queue<double, std::vector<double>, std::greater<double>> departures;
    double sum_T = 0.0;
    double sum_T2 = 0.0;
    double t = 0.0;
    double next_arrival = rng.exponential(spec.lambda0);
    for (;;) {
        const bool arrival = departures.empty() || next_arrival < departures.top();
        const double t_event = arrival ? next_arrival : departures.top();
        if (t_event > horizon) {
            accumulate(t, horizon, departures.size());
            break;
        }
        accumulate(t, t_event, departures.size());
        t = t_event;
        if (arrival) {
            const double life = detail::customer_lifetime(spec, cumulative, rng);
            departures.push(t + life);
            if (t >= burn_in && t + life <= horizon) {
                sum_T += life;
                sum_T2 += life * life;
                ++rep.customers;
            }
            next_arrival = t + rng.exponential(spec.lambda0);
        } else {
            departures.pop();
        }
    }

    const double m = static_cast<double>(rep.customers);
    if (rep.customers > 1) {
        rep.E_T_hat = sum_T / m;
        rep.E_T_stderr = std::sqrt(std::max(sum_T2 / m - rep.E_T_hat * rep.E_T_hat, 0.0) * m / (m - 1.0) / m);
    }
    double mean = 0.0;
    for (double a : batch_area) mean += a / batch_len;
    mean /= static_cast<double>(kQueueBatches);
    double ss = 0.0;
    for (double a : batch_area) ss += (a / batch_len - mean) * (a / batch_len - mean);
    rep.E_R_hat = mean;
    rep.E_R_stderr = std::sqrt(ss / static_cast<double>(kQueueBatches - 1) / static_cast<double>(kQueueBatches));
    return rep;
}

inline nlohmann::json to_json(const QueueReport& r)
{
    return {{"E_T_hat", r.E_T_hat}, {"E_T_stderr", r.E_T_stderr}, {"E_R_hat", r.E_R_hat},
            {"E_R_stderr", r.E_R_stderr}, {"lambda0", r.lambda0},    {"horizon", r.horizon},
            {"burn_in", r.burn_in},   {"customers", r.customers},   {"little_relative_gap", std::abs(r.E_T_hat * r.lambda0 - r.E_R_hat) / r.E_R_hat}};
}

} // namespace rwre
