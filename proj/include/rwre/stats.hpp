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
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <nlohmann/json.hpp>

namespace rwre {

/// Sorted samples with optional weights (uniform by default).
class EmpiricalDistribution {
public:
    explicit EmpiricalDistribution(std::vector<double> samples, std::vector<double> weights = {})
    {
        if (samples.empty()) throw std::invalid_argument("empty sample set");
        if (!weights.empty() && weights.size() != samples.size())
            throw std::invalid_argument("weights and samples differ in length");
        for (double s : samples)
            if (std::isnan(s)) throw std::invalid_argument("NaN sample");
        std::vector<std::size_t> order(samples.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return samples[a] < samples[b]; });
        double total = 0.0;
        for (double w : weights) {
            if (!(w > 0.0)) throw std::invalid_argument("weights must be positive");
            total += w;
        }
        for (std::size_t i : order) {
            samples_.push_back(samples[i]);
            weights_.push_back(weights.empty() ? 1.0 / static_cast<double>(samples.size()) : weights[i] / total);
        }
        // cumulative mass at the end of each block of equal values
        double acc = 0.0;
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            acc += weights_[i];
            if (i + 1 == samples_.size() || samples_[i + 1] != samples_[i]) {
                values_.push_back(samples_[i]);
                cumulative_.push_back(acc);
            }
        }
        cumulative_.back() = 1.0;
    }

    std::size_t size() const { return samples_.size(); }
    const std::vector<double>& samples() const { return samples_; }

    /// Distinct values and the ECDF just after each.
    const std::vector<double>& atoms() const { return values_; }
    const std::vector<double>& cumulative() const { return cumulative_; }

    double ecdf(double x) const
    {
        const auto it = std::upper_bound(values_.begin(), values_.end(), x);
        if (it == values_.begin()) return 0.0;
        return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
    }

    double mean() const
    {
        double m = 0.0;
        for (std::size_t i = 0; i < samples_.size(); ++i) m += weights_[i] * samples_[i];
        return m;
    }

private:
    std::vector<double> samples_;
    std::vector<double> weights_;
    std::vector<double> values_;
    std::vector<double> cumulative_;
};

inline double ecdf(const EmpiricalDistribution& dist, double x) { return dist.ecdf(x); }

/// sup_x |F_n(x) - F(x)| for continuous F, from both one-sided gaps at each atom.
inline double ks(const EmpiricalDistribution& dist, const std::function<double(double)>& cdf)
{
    double d = 0.0;
    double below = 0.0;
    const auto& v = dist.atoms();
    const auto& c = dist.cumulative();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = cdf(v[i]);
        d = std::max({d, c[i] - f, f - below});
        below = c[i];
    }
    return d;
}

/// Two-sample statistic sup_x |F_a(x) - F_b(x)|.
inline double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b)
{
    const auto& va = a.atoms();
    const auto& vb = b.atoms();
    const auto& ca = a.cumulative();
    const auto& cb = b.cumulative();
    std::size_t i = 0, j = 0;
    double fa = 0.0, fb = 0.0, d = 0.0;
    while (i < va.size() || j < vb.size()) {
        const double x = j == vb.size() || (i < va.size() && va[i] <= vb[j]) ? va[i] : vb[j];
        while (i < va.size() && va[i] <= x) fa = ca[i++];
        while (j < vb.size() && vb[j] <= x) fb = cb[j++];
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

struct MeanEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

inline MeanEstimate mean_and_stderr(const std::vector<double>& xs)
{
    if (xs.size() < 2) throw std::invalid_argument("need at least two samples");
    const double n = static_cast<double>(xs.size());
    double m = 0.0;
    for (double x : xs) m += x;
    m /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / (n - 1.0) / n)};
}

/// Tail probability estimate with its binomial standard error.
inline MeanEstimate proportion(std::size_t hits, std::size_t n)
{
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return {p, std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n))};
}

/// Check outcome. Everything except `meta` is a deterministic function of the
/// inputs; `meta` holds wall-clock data and is left out of comparisons.
struct VerificationReport {
    std::string check;
    nlohmann::json parameters = nlohmann::json::object();
    nlohmann::json statistics = nlohmann::json::object();
    nlohmann::json thresholds = nlohmann::json::object();
    bool pass = false;
    double runtime_seconds = 0.0;

    nlohmann::json to_json(bool with_meta = true) const
    {
        nlohmann::json j{{"check", check},
                         {"parameters", parameters},
                         {"statistics", statistics},
                         {"thresholds", thresholds},
                         {"pass", pass}};
        if (with_meta) j["meta"] = {{"runtime_seconds", runtime_seconds}};
        return j;
    }
};

struct ChiSquare {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

/// Pearson goodness of fit of cell counts against cell probabilities. Cells
/// are merged left to right until each expected count reaches min_expected;
/// a short remainder joins the last merged cell. A count in a cell of
/// probability zero gives p = 0.
inline ChiSquare chi_square_gof(const std::vector<std::size_t>& counts, const std::vector<double>& probs,
                                double min_expected = 5.0)
{
    if (counts.size() != probs.size() || counts.empty()) throw std::invalid_argument("chi_square_gof: size mismatch");
    const double m = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    std::vector<std::pair<double, double>> cells; // (observed, expected)
    double obs = 0.0, exp = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (probs[i] <= 0.0 && counts[i] > 0) return {std::numeric_limits<double>::infinity(), 0, 0.0};
        obs += static_cast<double>(counts[i]);
        exp += probs[i] * m;
        if (exp >= min_expected) {
            cells.emplace_back(obs, exp);
            obs = exp = 0.0;
        }
    }
    if (exp > 0.0 || obs > 0.0) {
        if (cells.empty()) cells.emplace_back(obs, exp);
        else {
            cells.back().first += obs;
            cells.back().second += exp;
        }
    }
    ChiSquare out;
    out.dof = static_cast<int>(cells.size()) - 1;
    for (const auto& [o, e] : cells) out.statistic += (o - e) * (o - e) / e;
    if (out.dof < 1) return out;
    const boost::math::chi_squared dist(out.dof);
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
    return out;
}

/// Every acceptance threshold in one place.
struct Thresholds {
    double ks_rayleigh_srw = 0.02;
    double ks_rayleigh_random = 0.03;
    double ks_marginal = 0.03;
    double ratio_srw = 0.05;
    double ratio_random = 0.08;
    double lemma_flatness = 0.20;
    double srw_exit_over_N_max = 0.8;
    double overshoot_eta = 0.05;
    double overshoot_eta_loose = 0.1;
    double ks_corollary = 0.05;
    double stderr_multiple = 3.0;
    double gof_alpha = 1e-4;
    double reversibility_tol = 1e-12;
    double little_relative = 0.05;
    double ks_meander_endpoint = 0.02;
    double quadrature_mass = 1e-8;
    double tightness_tail_abs = 0.01;
    double tightness_small_t_max = 0.2;
    double tightness_small_h_min = 0.97;
    double exact_oracle = 1e-12;
    double crossing_route_agreement = 1e-10;

    nlohmann::json to_json() const
    {
        return {{"ks_rayleigh_srw", ks_rayleigh_srw},
                {"ks_rayleigh_random", ks_rayleigh_random},
                {"ks_marginal", ks_marginal},
                {"ratio_srw", ratio_srw},
                {"ratio_random", ratio_random},
                {"lemma_flatness", lemma_flatness},
                {"srw_exit_over_N_max", srw_exit_over_N_max},
                {"overshoot_eta", overshoot_eta},
                {"overshoot_eta_loose", overshoot_eta_loose},
                {"ks_corollary", ks_corollary},
                {"stderr_multiple", stderr_multiple},
                {"gof_alpha", gof_alpha},
                {"reversibility_tol", reversibility_tol},
                {"little_relative", little_relative},
                {"ks_meander_endpoint", ks_meander_endpoint},
                {"quadrature_mass", quadrature_mass},
                {"tightness_tail_abs", tightness_tail_abs},
                {"tightness_small_t_max", tightness_small_t_max},
                {"tightness_small_h_min", tightness_small_h_min},
                {"exact_oracle", exact_oracle},
                {"crossing_route_agreement", crossing_route_agreement}};
    }
};

} // namespace rwre
