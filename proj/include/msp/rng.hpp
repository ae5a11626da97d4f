#pragma once

// Reproducible random streams.
//
// Every random quantity in a run is drawn from a stream identified by
// (master seed, environment index, stream id). The stream's starting state
// is a splitmix64 hash of that triple, so the draws of one environment never
// depend on how many environments were generated before it or on which
// thread generated them. Within a stream, xoshiro256++ produces the sequence.
//
// Variates are produced by explicit transforms (not <random> distributions)
// so the bits are identical across standard library implementations.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace msp {

enum class StreamId : std::uint64_t {
    Arrivals = 0,
    Points = 1,
    Signs = 2,
    Remainder = 3,
    Oracle = 4,
    Bootstrap = 5,
};

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based derivation of a stream key from (seed, index, stream).
[[nodiscard]] constexpr std::uint64_t derive_stream_key(std::uint64_t seed, std::uint64_t index,
                                                        StreamId stream) noexcept {
    std::uint64_t s = seed;
    std::uint64_t k = splitmix64(s);
    s = k ^ (index * 0xD1342543DE82EF95ULL);
    k = splitmix64(s);
    s = k ^ (static_cast<std::uint64_t>(stream) * 0xA0761D6478BD642FULL + 0x2545F4914F6CDD1DULL);
    return splitmix64(s);
}

/// xoshiro256++; satisfies UniformRandomBitGenerator.
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit constexpr Xoshiro256pp(std::uint64_t key = 0) noexcept {
        std::uint64_t s = key;
        for (auto& w : state_) w = splitmix64(s);
    }

    Xoshiro256pp(std::uint64_t seed, std::uint64_t index, StreamId stream) noexcept
        : Xoshiro256pp(derive_stream_key(seed, index, stream)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1).
    double uniform_open() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double exponential() noexcept { return -std::log(uniform_open()); }

    /// +1 or -1 with probability 1/2 each.
    double rademacher() noexcept { return ((*this)() >> 63) != 0 ? 1.0 : -1.0; }

    /// Standard normal by Box-Muller; the second variate is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_open()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace msp
