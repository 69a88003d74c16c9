#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace mipred::rng {

// splitmix64 (Steele, Lea, Flood; public-domain reference constants).
// Used for stream seeding only.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a 64-bit, used to derive substream ids from names and to hash
// artifact payloads for reproducibility stamps.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// xoshiro256** 1.0 (Blackman & Vigna, public-domain reference constants).
// Fixed in this repo so shuffles and samples are bit-reproducible across
// platforms, unlike std::shuffle / std::uniform_int_distribution.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Unbiased integer in [0, bound) by rejection on the top bits.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) return 0;
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform double in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller (polar form avoided to keep the
    // consumption pattern fixed: exactly two draws per pair).
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4]{};
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// All randomness in the artifact flows from one master seed through named
// substreams, so each component (split, folds, undersample, ...) is
// independently reproducible.
inline Xoshiro256 substream(std::uint64_t master_seed, std::string_view name) {
    std::uint64_t mix = master_seed ^ fnv1a64(name);
    return Xoshiro256(splitmix64(mix));
}

// In-place Fisher-Yates shuffle driven by the fixed generator above.
template <typename T>
void shuffle(std::vector<T>& items, Xoshiro256& gen) {
    if (items.size() < 2) return;
    for (std::size_t i = items.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(gen.below(i + 1));
        std::swap(items[i], items[j]);
    }
}

// First k elements of a Fisher-Yates pass: a uniform sample without
// replacement, in sampled order.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t k, Xoshiro256& gen) {
    if (k > pool.size()) k = pool.size();
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(gen.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace mipred::rng
