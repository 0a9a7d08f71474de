#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace clocktree {

// SplitMix64, used to seed streams and to derive independent per-sample seeds.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256** by Blackman & Vigna; fixed bit-level behavior on every
// platform, unlike the std:: distributions.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Index into a probability row by inverse CDF scan.
    int categorical(const std::vector<double>& probs) {
        double u = next_double();
        double acc = 0.0;
        const size_t n = probs.size();
        for (size_t i = 0; i + 1 < n; ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(n - 1);
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

// Seed for sample `index` of a run seeded with `seed`. Independent of
// execution order, so parallel sampling reproduces the sequential run.
inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
    uint64_t st = seed ^ (0x9E3779B97F4A7C15ULL * (index + 1));
    return splitmix64(st);
}

}  // namespace clocktree
