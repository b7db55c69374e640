#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace atcd {

// Deterministic random stream (xoshiro256++). All randomness in the project
// flows from one master seed through named substreams so that every pipeline
// stage is reproducible independently of the others.
//
// std::uniform_real_distribution and friends are implementation-defined, so
// the draw algorithms live here instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        // splitmix64 expansion of the seed into the xoshiro state.
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            word = z ^ (z >> 31);
        }
    }

    // Derives an independent stream from (master, name, index). Used as
    // Rng::substream(seed, "sampler", fold).
    static Rng substream(std::uint64_t master, std::string_view name, std::uint64_t index = 0) {
        std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ULL;
        }
        return Rng(master ^ h ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
    }

    std::uint64_t next_u64() {
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

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Standard normal via Box-Muller, second value cached.
    double normal(double mean = 0.0, double sd = 1.0) {
        if (has_cache_) {
            has_cache_ = false;
            return mean + sd * cache_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        cache_ = r * std::sin(theta);
        has_cache_ = true;
        return mean + sd * r * std::cos(theta);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Fisher-Yates over an index-addressable container.
    template <typename Vec>
    void shuffle(Vec& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    double cache_ = 0.0;
    bool has_cache_ = false;
};

}  // namespace atcd
