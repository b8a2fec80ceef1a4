#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace fdigame {

/// SplitMix64 finalizer; used to key streams and to derive sub-seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Deterministic child seed for the `label`-th independent estimate under `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) {
    return splitmix64(seed ^ splitmix64(0xD1B54A32D192ED03ULL * (label + 1)));
}

/// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t key) {
        for (auto& word : state_) {
            key += 0x9E3779B97F4A7C15ULL;
            word = splitmix64(key);
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
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

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
};

/// A reproducible source of standard normal variates keyed by
/// (seed, stream_index). Monte Carlo trial k always uses stream_index = k,
/// so estimates do not depend on how trials are split across workers.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_index)
        : seed_(seed), stream_index_(stream_index), engine_(splitmix64(seed) ^ splitmix64(~stream_index)) {}

    double normal() { return normal_(engine_); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_index_;
    Xoshiro256pp engine_;
    boost::random::normal_distribution<double> normal_;
};

}  // namespace fdigame
