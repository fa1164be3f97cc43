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

#include <cmath>
#include <numbers>

#include "rwre/rng.hpp"
#include "rwre/stats.hpp"

using namespace rwre;

namespace {

double uniform_cdf(double x) { return std::clamp(x, 0.0, 1.0); }

} // namespace

TEST(Ks, MidpointSampleHasHalfStep)
{
    const int n = 50;
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back((i + 0.5) / n);
    EXPECT_NEAR(ks(EmpiricalDistribution(xs), uniform_cdf), 0.5 / n, 1e-15);
}

TEST(Ks, BothGapsAreCounted)
{
    // F_n jumps from 0 to 1 at 0.5: the gap below the atom is 0.5 and so is the gap above.
    EXPECT_DOUBLE_EQ(ks(EmpiricalDistribution({0.5}), uniform_cdf), 0.5);
    EXPECT_DOUBLE_EQ(ks(EmpiricalDistribution({0.9}), uniform_cdf), 0.9);
    EXPECT_DOUBLE_EQ(ks(EmpiricalDistribution({0.1}), uniform_cdf), 0.9);
}

TEST(Ks, TiesFormOneAtom)
{
    const EmpiricalDistribution d({0.25, 0.25, 0.25, 0.75});
    ASSERT_EQ(d.atoms().size(), 2u);
    EXPECT_DOUBLE_EQ(d.cumulative()[0], 0.75);
    EXPECT_DOUBLE_EQ(ks(d, uniform_cdf), 0.5);
    EXPECT_DOUBLE_EQ(d.ecdf(0.2), 0.0);
    EXPECT_DOUBLE_EQ(d.ecdf(0.25), 0.75);
    EXPECT_DOUBLE_EQ(d.ecdf(1.0), 1.0);
}

TEST(Ks, InvariantUnderIncreasingMap)
{
    Stream rng(1, 0);
    std::vector<double> xs, cubes;
    for (int i = 0; i < 2000; ++i) {
        const double e = rng.exponential();
        xs.push_back(e);
        cubes.push_back(e * e * e);
    }
    const auto exp_cdf = [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); };
    const auto cube_cdf = [&](double y) { return exp_cdf(std::cbrt(y)); };
    EXPECT_NEAR(ks(EmpiricalDistribution(xs), exp_cdf), ks(EmpiricalDistribution(cubes), cube_cdf), 1e-12);
    EXPECT_NEAR(ks_two_sample(EmpiricalDistribution(xs), EmpiricalDistribution(std::vector<double>(xs.begin(), xs.begin() + 700))),
                ks_two_sample(EmpiricalDistribution(cubes),
                              EmpiricalDistribution(std::vector<double>(cubes.begin(), cubes.begin() + 700))),
                1e-15);
}

TEST(Ks, LargeSampleIsSmall)
{
    Stream rng(2, 0);
    std::vector<double> xs(20000);
    for (auto& x : xs) x = rng.uniform();
    // 1.63 / sqrt(n) is the 1% critical value
    EXPECT_LT(ks(EmpiricalDistribution(xs), uniform_cdf), 1.63 / std::sqrt(20000.0));
}

TEST(Ks, TwoSampleExtremes)
{
    const EmpiricalDistribution a({1.0, 2.0, 3.0});
    EXPECT_DOUBLE_EQ(ks_two_sample(a, a), 0.0);
    EXPECT_DOUBLE_EQ(ks_two_sample(a, EmpiricalDistribution({4.0, 5.0})), 1.0);
    EXPECT_DOUBLE_EQ(ks_two_sample(a, EmpiricalDistribution({2.0})), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(ks_two_sample(a, EmpiricalDistribution({0.0})), 1.0);
}

TEST(Empirical, WeightsAndMean)
{
    const EmpiricalDistribution d({3.0, 1.0}, {1.0, 3.0});
    EXPECT_DOUBLE_EQ(d.ecdf(1.0), 0.75);
    EXPECT_DOUBLE_EQ(d.mean(), 1.5);
    EXPECT_THROW(EmpiricalDistribution({}), std::invalid_argument);
    EXPECT_THROW(EmpiricalDistribution({1.0, NAN}), std::invalid_argument);
    EXPECT_THROW(EmpiricalDistribution({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST(Estimates, MeanStderrAndProportion)
{
    const auto e = mean_and_stderr({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(e.mean, 2.5);
    EXPECT_NEAR(e.stderr_, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
    const auto p = proportion(25, 100);
    EXPECT_DOUBLE_EQ(p.mean, 0.25);
    EXPECT_NEAR(p.stderr_, std::sqrt(0.25 * 0.75 / 100), 1e-15);
    EXPECT_THROW(mean_and_stderr({1.0}), std::invalid_argument);
}

TEST(Report, MetaOnlyWhenAsked)
{
    VerificationReport r;
    r.check = "x";
    r.pass = true;
    r.runtime_seconds = 1.5;
    EXPECT_TRUE(r.to_json(true).contains("meta"));
    EXPECT_FALSE(r.to_json(false).contains("meta"));
    EXPECT_EQ(r.to_json(false).at("pass"), true);
}

TEST(ChiSquare, StatisticAndPValue)
{
    // 100 draws over four equal cells: (30-25)^2/25 + 0 + (20-25)^2/25 + 0 = 2
    const auto a = chi_square_gof({30, 25, 20, 25}, {0.25, 0.25, 0.25, 0.25});
    EXPECT_DOUBLE_EQ(a.statistic, 2.0);
    EXPECT_EQ(a.dof, 3);
    // closed-form survival for 3 dof: erfc(sqrt(x/2)) + sqrt(2x/pi) exp(-x/2)
    EXPECT_NEAR(a.p_value, std::erfc(1.0) + std::sqrt(4.0 / std::numbers::pi) * std::exp(-1.0), 1e-12);

    // 1 dof: erfc(sqrt(x/2)); (220-200)^2/200 * 2 = 4
    const auto c = chi_square_gof({220, 180}, {0.5, 0.5});
    EXPECT_DOUBLE_EQ(c.statistic, 4.0);
    EXPECT_NEAR(c.p_value, std::erfc(std::sqrt(2.0)), 1e-12);

    const auto one = chi_square_gof({7}, {1.0});
    EXPECT_EQ(one.dof, 0);
    EXPECT_EQ(one.p_value, 1.0);
}

TEST(ChiSquare, SparseCellsMergeAndImpossibleCounts)
{
    // expected 90, 6, 2, 1, 1: merges to (90), (6), (2+1+1 = 4, joins the 6)
    const auto a = chi_square_gof({90, 6, 2, 1, 1}, {0.9, 0.06, 0.02, 0.01, 0.01});
    EXPECT_EQ(a.dof, 1);
    EXPECT_NEAR(a.statistic, 0.0, 1e-12);
    const auto b = chi_square_gof({99, 1}, {1.0, 0.0});
    EXPECT_EQ(b.p_value, 0.0);
    EXPECT_THROW(chi_square_gof({1, 2}, {1.0}), std::invalid_argument);
}

TEST(Thresholds, AllExported)
{
    const auto j = Thresholds{}.to_json();
    EXPECT_EQ(j.at("ks_rayleigh_srw"), 0.02);
    EXPECT_EQ(j.at("ks_rayleigh_random"), 0.03);
    EXPECT_EQ(j.at("reversibility_tol"), 1e-12);
    EXPECT_EQ(j.size(), 21u);
}
