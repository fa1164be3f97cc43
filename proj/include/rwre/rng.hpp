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

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace rwre {

// Philox4x32-10 (Salmon et al., SC 2011). Every draw in this library is a
// pure function of (key, counter), so results never depend on thread count
// or on the order in which independent samples are generated.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key)
    {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

inline Philox4x32::Key philox_key(std::uint64_t seed)
{
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

// 53-bit uniform in [0, 1).
inline double to_unit_double(std::uint32_t hi, std::uint32_t lo)
{
    const std::uint64_t bits = (std::uint64_t{hi} << 32 | lo) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
}

/// Keyed draw: a uniform in [0,1) determined by (seed, a, b, c) alone.
/// Used wherever a value must not depend on how much else was generated
/// (environment weights keyed on site and jump length).
inline double keyed_uniform(std::uint64_t seed, std::int64_t a, std::uint32_t b, std::uint32_t c = 0)
{
    const auto ua = static_cast<std::uint64_t>(a);
    const auto out = Philox4x32::block(
        {static_cast<std::uint32_t>(ua), static_cast<std::uint32_t>(ua >> 32), b, c}, philox_key(seed));
    return to_unit_double(out[0], out[1]);
}

/// Sequential stream over a Philox counter. Stream `id` of master `seed`
/// is independent of every other id; each worker or sample owns one.
class Stream {
public:
    using result_type = std::uint32_t;

    Stream(std::uint64_t seed, std::uint64_t id)
        : key_(philox_key(seed))
        , id_(id)
    {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    double uniform()
    {
        const std::uint32_t hi = (*this)();
        const std::uint32_t lo = (*this)();
        return to_unit_double(hi, lo);
    }

    // (0, 1], safe under log.
    double uniform_pos() { return 1.0 - uniform(); }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double exponential(double rate = 1.0) { return -std::log(uniform_pos()) / rate; }

private:
    void refill()
    {
        buf_ = Philox4x32::block({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                  static_cast<std::uint32_t>(id_), static_cast<std::uint32_t>(id_ >> 32)},
                                 key_);
        ++block_;
        pos_ = 0;
    }

    Philox4x32::Key key_;
    std::uint64_t id_;
    std::uint64_t block_ = 0;
    Philox4x32::Counter buf_{};
    int pos_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Sub-seed derivation so that e.g. the sigma fit and the conditioned sampler
// of one verification run use unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt)
{
    const auto out = Philox4x32::block({static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32),
                                        0x5eedu, 0x5eedu},
                                       philox_key(seed));
    return std::uint64_t{out[0]} << 32 | out[1];
}

} // namespace rwre
