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

#include "rwre/particles.hpp"

using namespace rwre;

namespace {

ParticleSystemSpec srw_system(Site N)
{
    return particle_system(reduce(generate(EnvironmentParams::srw(-16, 64)), N, ReductionKind::omega3));
}

ParticleSystemSpec random_system(Site N, int R, std::uint64_t seed)
{
    const auto env = generate(EnvironmentParams::random(GeneratorKind::markov_modulated, R, seed, -16, 64));
    return particle_system(reduce(env, N, ReductionKind::omega3));
}

ParticleConfig config(std::vector<int> occ) { return ParticleConfig{std::move(occ)}; }

} // namespace

TEST(Particles, RowsOfQSumToOne)
{
    const auto s = random_system(4, 3, 1);
    for (Site x = 0; x <= 4; ++x) {
        double t = 0.0;
        for (Site y = 0; y <= 4; ++y) t += s.rate(x, y);
        EXPECT_NEAR(t, 1.0, 1e-14);
    }
    EXPECT_EQ(s.lambda0, s.mass[0]);
    EXPECT_EQ(s.lambdaN, s.mass[4]);
}

TEST(Particles, SrwRates)
{
    // N = 3: C3 = (3, 2, 2, 1); q(0,1) = 1/3, q(3,2) = 1.
    const auto s = srw_system(3);
    EXPECT_DOUBLE_EQ(particle_rates(s, config({0, 0, 0, 0}), config({0, 1, 0, 0})), 1.0);
    EXPECT_DOUBLE_EQ(particle_rates(s, config({0, 0, 0, 0}), config({0, 0, 1, 0})), 1.0);
    EXPECT_DOUBLE_EQ(particle_rates(s, config({0, 2, 0, 0}), config({0, 1, 0, 0})), 1.0);
    EXPECT_DOUBLE_EQ(particle_rates(s, config({0, 2, 0, 0}), config({0, 1, 1, 0})), 1.0);
    EXPECT_DOUBLE_EQ(particle_rates(s, config({0, 1, 0, 0}), config({0, 0, 0, 1})), 0.0);
    EXPECT_DOUBLE_EQ(particle_rates(s, config({0, 1, 1, 0}), config({0, 0, 0, 0})), 0.0);
}

TEST(Particles, ReversibleForProductPoisson)
{
    for (Site N : {2, 3, 4}) {
        for (const auto& s : {srw_system(N), random_system(N, 2, 3), random_system(N, 3, 4)}) {
            const auto rep = check_reversibility(s, 3, 1e-12);
            EXPECT_TRUE(rep.pass) << "N=" << N << " violation " << rep.max_violation;
            EXPECT_LE(rep.max_violation, 1e-12);
            // configurations with at most 3 particles on N + 1 sites
            const double expect = std::round(std::exp(std::lgamma(3 + N + 2.0) - std::lgamma(4.0) - std::lgamma(N + 2.0)));
            EXPECT_EQ(rep.configurations, static_cast<std::size_t>(expect));
            EXPECT_GT(rep.pairs, 0u);
        }
    }
}

TEST(Particles, DetectsBrokenBalance)
{
    auto s = random_system(3, 2, 5);
    s.lambda0 *= 2.0;
    EXPECT_FALSE(check_reversibility(s, 2, 1e-12).pass);
}

TEST(Particles, ProductPoissonNormalised)
{
    // Summing the product measure over all configurations with one site
    // varying recovers the single-site Poisson normalisation.
    const auto s = srw_system(2);
    double total = 0.0;
    for (int k = 0; k < 60; ++k) total += std::exp(log_product_poisson(s, config({k, 0, 0})));
    EXPECT_NEAR(total, std::exp(-s.mass[1] - s.mass[2]), 1e-14);
}

TEST(Particles, EnumerationGuard)
{
    EXPECT_THROW(check_reversibility(srw_system(40), 30, 1e-12), std::invalid_argument);
}

TEST(Queue, LittleLawSrw)
{
    const auto s = srw_system(4);
    const auto q = simulate_queue(s, 20000.0 / s.lambda0, 3);
    const double exact = 2.0; // (N + 2) / 3
    EXPECT_NEAR(q.E_T_hat, exact, 3.0 * q.E_T_stderr + 1e-12);
    EXPECT_NEAR(q.E_R_hat / q.lambda0 / q.E_T_hat, 1.0, 0.05);
    EXPECT_GT(q.customers, 10000u);
}

TEST(Queue, LittleLawRandom)
{
    const auto env = generate(EnvironmentParams::random(GeneratorKind::iid_uniform, 3, 2, -16, 64));
    const auto red = reduce(env, 8, ReductionKind::omega3);
    const auto s = particle_system(red);
    const auto q = simulate_queue(s, 30000.0 / s.lambda0, 4);
    EXPECT_NEAR(q.E_T_hat, reduced_exit_time(red), 3.0 * q.E_T_stderr);
    EXPECT_NEAR(q.E_R_hat / q.lambda0 / q.E_T_hat, 1.0, 0.05);
    EXPECT_LE(q.E_T_hat, little_bound(red));
}

TEST(Queue, Deterministic)
{
    const auto s = srw_system(3);
    const auto a = simulate_queue(s, 500.0, 8);
    const auto b = simulate_queue(s, 500.0, 8);
    EXPECT_EQ(to_json(a), to_json(b));
}
