#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ibf {

/// SplitMix64 step; used for seeding and hashing stream identifiers.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** with jump-ahead. Independent streams are obtained by jumping
/// 2^128 steps per stream index from a seed-derived origin, so streams for
/// (seed, k) never overlap in practice. All variate generation is written out
/// here so that output is identical across standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);
    static Rng stream(std::uint64_t seed, std::uint64_t index);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1).
    double uniform_open();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal by the Marsaglia polar method.
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

    void jump();

private:
    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ibf
