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


#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "oracles.hpp"
#include "rwre/walk.hpp"

using namespace rwre;

namespace {

Environment small_random(int R = 2, std::uint64_t seed = 3)
{
    return generate(EnvironmentParams::random(GeneratorKind::iid_uniform, R, seed, -64, 128));
}

Environment srw_env(Site lo = -64, Site hi = 4200) { return generate(EnvironmentParams::srw(lo, hi)); }

// Probability the h-transform assigns to a whole path, from the one-step laws.
double meander_path_probability(const TransitionKernel& k, const SurvivalTable& t, const std::vector<Site>& path)
{
    double prob = 1.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        double step = 0.0;
        for (const auto& [y, q] : meander_step_law(k, t, i, path[i]))
            if (y == path[i + 1]) step = q;
        prob *= step;
    }
    return prob;
}

double crossing_path_probability(const TransitionKernel& k, const HarmonicTable& t, const std::vector<Site>& path)
{
    double prob = 1.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        double step = 0.0;
        for (const auto& [y, q] : crossing_step_law(k, t, path[i]))
            if (y == path[i + 1]) step = q;
        prob *= step;
    }
    return prob;
}

} // namespace

TEST(Survival, SrwClosedForm)
{
    const auto env = srw_env();
    EXPECT_DOUBLE_EQ(survival_probability(env, 1).value(), 0.5);
    EXPECT_DOUBLE_EQ(survival_probability(env, 2).value(), 0.25);
    for (std::size_t n : {3u, 10u, 57u, 200u, 1000u})
        EXPECT_NEAR(survival_probability(env, n).value() / oracle::srw_survival(n), 1.0, 1e-11) << n;
}

TEST(Survival, MatchesEnumeration)
{
    for (std::uint64_t seed : {1u, 2u}) {
        const auto env = small_random(2, seed);
        for (std::size_t n = 1; n <= 9; ++n)
            EXPECT_NEAR(survival_probability(env, n).value(), oracle::survival_by_enumeration(env, n), 1e-14);
    }
}

TEST(Survival, BracketIsCertified)
{
    const auto env = generate(EnvironmentParams::random(GeneratorKind::markov_modulated, 3, 1, -600, 1200));
    const auto res = survival_probability(env, 2048);
    EXPECT_TRUE(res.certified);
    EXPECT_GE(res.upper, res.lower);
    EXPECT_LE(res.bracket(), kSurvivalBracketTolerance);
    // a deliberately tiny window is not certified but still brackets the truth
    const auto tight = detail::survival_fixed_window(TransitionKernel(env), 2048, 8);
    EXPECT_LE(tight.lower, res.lower + 1e-15);
    EXPECT_GE(tight.upper, res.upper - 1e-15);
    EXPECT_GT(tight.bracket(), 1e-6);
}

TEST(Survival, TableGivesShorterHorizons)
{
    const auto env = small_random(3, 5);
    const auto res = survival_probability(env, 40);
    for (std::size_t r : {1u, 7u, 20u, 39u, 40u})
        EXPECT_NEAR(res.table.survival(r), survival_probability(env, r).value(), 1e-14);
    EXPECT_EQ(res.table.survival(0), 1.0);
    EXPECT_THROW(res.table.survival(41), std::out_of_range);
}

TEST(Survival, SmallEnvironmentReportsUncertifiedBracket)
{
    const auto env = generate(EnvironmentParams::srw(-4, 20));
    const auto res = survival_probability(env, 400);
    EXPECT_FALSE(res.certified);
    EXPECT_LE(res.lower, oracle::srw_survival(400));
    EXPECT_GE(res.upper, oracle::srw_survival(400));
    EXPECT_THROW(survival_probability(env, 400, 50), WindowError);
}

TEST(Meander, PathLawMatchesEnumeration)
{
    for (const auto& env : {srw_env(-64, 128), small_random(2, 1), small_random(2, 2)}) {
        const TransitionKernel k(env);
        for (std::size_t n : {1u, 4u, 8u}) {
            const auto t = survival_probability(k, n);
            const double total = oracle::survival_by_enumeration(env, n);
            double err = 0.0, mass = 0.0;
            oracle::positive_paths(env, n, [&](const std::vector<Site>& path, double q) {
                const double h = meander_path_probability(k, t.table, path);
                err = std::max(err, std::abs(h - q / total));
                mass += h;
            });
            EXPECT_LE(err, 1e-12) << "n=" << n;
            EXPECT_NEAR(mass, 1.0, 1e-12);
        }
    }
}

TEST(Meander, SamplerFrequenciesMatchEnumeration)
{
    const auto env = small_random(2, 4);
    const TransitionKernel k(env);
    const std::size_t n = 4, m = 200000;
    const auto t = survival_probability(k, n);
    std::map<std::vector<Site>, int> counts;
    for (std::size_t i = 0; i < m; ++i) {
        const auto p = conditioned_sample_meander(k, t.table, 77, i);
        for (std::size_t j = 1; j < p.positions.size(); ++j) ASSERT_GT(p.positions[j], 0);
        ++counts[p.positions];
    }
    const double total = oracle::survival_by_enumeration(env, n);
    oracle::positive_paths(env, n, [&](const std::vector<Site>& path, double q) {
        const double expected = q / total;
        const double freq = static_cast<double>(counts[path]) / m;
        EXPECT_NEAR(freq, expected, 5.0 * std::sqrt(expected * (1 - expected) / m) + 1e-9);
    });
}

TEST(Meander, ParallelDrawsAreIdentical)
{
    const auto env = small_random(3, 6);
    const TransitionKernel k(env);
    const auto t = survival_probability(k, 50);
    std::vector<std::vector<Site>> a(64), b(64);
    for_each_meander(k, t.table, 64, 9, 1, [&](std::size_t i, const WalkPath& p) { a[i] = p.positions; });
    for_each_meander(k, t.table, 64, 9, 4, [&](std::size_t i, const WalkPath& p) { b[i] = p.positions; });
    EXPECT_EQ(a, b);
}

TEST(Crossing, SrwGamblersRuin)
{
    const auto env = srw_env(-64, 600);
    const TransitionKernel k(env);
    for (Site N : {2, 5, 16, 128}) {
        const auto h = harmonic_hit(k, N);
        EXPECT_NEAR(h.crossing_probability(), 1.0 / (2.0 * N), 1e-13);
        for (Site x = 1; x < N; ++x) EXPECT_NEAR(h.value(x), static_cast<double>(x) / N, 1e-13);
        EXPECT_NEAR(expected_exit_time(k, N), 1.0 + (N - 1) / 2.0, 1e-10);
        const auto ex = exit_distribution(k, N);
        ASSERT_EQ(ex.size(), 1u);
        EXPECT_EQ(ex[0].first, N);
        EXPECT_NEAR(ex[0].second, 1.0, 1e-15);
    }
    EXPECT_NEAR(expected_exit_time(k, 2), 1.5, 1e-14);
}

TEST(Crossing, ForwardMassMatchesHarmonicSolve)
{
    for (int R : {2, 3})
        for (std::uint64_t seed : {1u, 2u}) {
            const auto env = small_random(R, seed);
            for (Site N : {2, 4, 6, 12})
                EXPECT_NEAR(harmonic_hit(env, N).crossing_probability(), oracle::crossing_by_forward_mass(env, N), 1e-13);
        }
}

TEST(Crossing, PathLawMatchesEnumeration)
{
    for (const auto& env : {srw_env(-64, 128), small_random(2, 1)}) {
        const TransitionKernel k(env);
        for (Site N : {2, 4, 6}) {
            const auto h = harmonic_hit(k, N);
            const double pa = oracle::crossing_by_forward_mass(env, N);
            double err = 0.0;
            oracle::crossing_paths(env, N, 10, [&](const std::vector<Site>& path, double q) {
                err = std::max(err, std::abs(crossing_path_probability(k, h, path) - q / pa));
            });
            EXPECT_LE(err, 1e-12) << "N=" << N;
        }
    }
}

TEST(Crossing, SampledPathsStayPositiveAndEndInE)
{
    const auto env = small_random(3, 8);
    const TransitionKernel k(env);
    const auto h = harmonic_hit(k, 20);
    for (std::uint64_t i = 0; i < 500; ++i) {
        const auto p = conditioned_sample_crossing(k, h, 3, i);
        for (std::size_t j = 1; j < p.positions.size(); ++j) ASSERT_GT(p.positions[j], 0);
        ASSERT_GE(p.positions.back(), 20);
        ASSERT_LT(p.positions[p.positions.size() - 2], 20);
    }
}

TEST(Crossing, ExitDistributionSumsToOneAndMatchesSampler)
{
    const auto env = generate(EnvironmentParams::random(GeneratorKind::iid_uniform, 4, 2, -64, 256));
    const TransitionKernel k(env);
    const Site N = 10;
    const auto ex = exit_distribution(k, N);
    double s = 0.0;
    for (const auto& [y, q] : ex) s += q;
    EXPECT_NEAR(s, 1.0, 1e-13);
    const auto h = harmonic_hit(k, N);
    const std::size_t m = 40000;
    std::map<Site, int> counts;
    for (std::size_t i = 0; i < m; ++i) ++counts[conditioned_sample_crossing(k, h, 12, i).positions.back()];
    for (const auto& [y, q] : ex)
        EXPECT_NEAR(static_cast<double>(counts[y]) / m, q, 5.0 * std::sqrt(q * (1 - q) / m) + 1e-9) << y;
}

TEST(Rescale, PolygonalInterpolation)
{
    const std::vector<Site> pos{0, 2, 1, 3};
    const auto z = rescale(pos, 4.0, 0.5); // scale 1 / (0.5 * 2) = 1
    EXPECT_DOUBLE_EQ(z.at(0.0), 0.0);
    EXPECT_DOUBLE_EQ(z.at(0.25), 2.0);
    EXPECT_DOUBLE_EQ(z.at(0.125), 1.0);
    EXPECT_DOUBLE_EQ(z.at(0.375), 1.5);
    EXPECT_DOUBLE_EQ(z.at(0.625), 2.0);
    EXPECT_DOUBLE_EQ(z.at(1.0), 3.0);
    EXPECT_THROW(rescale(pos, 4.0, 0.0), std::invalid_argument);
}

TEST(Rescale, CrossingFunctionalsInterpolateTheLevel)
{
    // n = 2: level 2 of X, clock 4; X jumps 1 -> 3 between k = 2 and k = 3.
    const std::vector<Site> pos{0, 1, 1, 3};
    const auto f = crossing_functionals(pos, 2, 1.0);
    EXPECT_DOUBLE_EQ(f.T, 2.5 / 4.0);
    EXPECT_DOUBLE_EQ(f.Y.at(0.9), 1.0);
    EXPECT_DOUBLE_EQ(f.Y.at(0.25), 0.5);
    EXPECT_THROW(crossing_functionals(std::vector<Site>{0, 1}, 2, 1.0), std::invalid_argument);
}

TEST(Sigma, SrwIsOne)
{
    const auto env = srw_env(-2000, 2000);
    const auto est = estimate_sigma(TransitionKernel(env), 1000, 4000, 1);
    EXPECT_NEAR(est.sigma, 1.0, 3.0 * est.stderr_ + 1e-3);
    EXPECT_GT(est.stderr_, 0.0);
}

TEST(Sigma, MarkovStableAcrossHorizons)
{
    const auto env = generate(EnvironmentParams::random(GeneratorKind::markov_modulated, 3, 1, -8192, 8192));
    const TransitionKernel k(env);
    const auto a = estimate_sigma(k, 1000, 8000, 2);
    const auto b = estimate_sigma(k, 4000, 8000, 3);
    EXPECT_NEAR(a.sigma / b.sigma, 1.0, 0.05);
}

TEST(Sigma, JobsDoNotChangeTheEstimate)
{
    const TransitionKernel k(generate(EnvironmentParams::random(GeneratorKind::iid_uniform, 2, 1, -2000, 2000)));
    const auto a = estimate_sigma(k, 200, 400, 5, 1);
    const auto b = estimate_sigma(k, 200, 400, 5, 3);
    EXPECT_EQ(a.sigma, b.sigma);
    EXPECT_EQ(a.stderr_, b.stderr_);
}

TEST(Tables, BinaryRoundTrip)
{
    const auto env = small_random(3, 2);
    const TransitionKernel k(env);
    const auto s = survival_probability(k, 30).table;
    std::stringstream buf;
    write_table(buf, s);
    EXPECT_EQ(read_survival_table(buf), s);
    const auto h = harmonic_hit(k, 9);
    std::stringstream buf2;
    write_table(buf2, h);
    EXPECT_EQ(read_harmonic_table(buf2), h);
    std::stringstream bad("not a table");
    EXPECT_THROW(read_survival_table(bad), std::runtime_error);
}

TEST(Simulate, DeterministicAndNearestNeighbourForSrw)
{
    const auto env = srw_env(-200, 200);
    const auto a = simulate(env, 0, 150, 4);
    EXPECT_EQ(a.positions, simulate(env, 0, 150, 4).positions);
    EXPECT_NE(a.positions, simulate(env, 0, 150, 5).positions);
    for (std::size_t i = 1; i < a.positions.size(); ++i) EXPECT_EQ(std::abs(a.positions[i] - a.positions[i - 1]), 1);
}
