#pragma once

// Deterministic random numbers. Two flavors are used throughout:
//   - Rng: a sequential splitmix64 stream for plan/rollout decisions.
//   - keyed draws: pure hash-based values for per-(robot, tick, object)
//     noise, so recomputing a frame always reproduces the same numbers
//     regardless of evaluation order.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace intentsim {

// splitmix64 finalizer; good avalanche, cheap.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
    return mix64(seed ^ (v + 0x9E3779B97F4A7C15ULL + (seed << 6) + (seed >> 2)));
}

// FNV-1a over a short tag string, used to derive independent substreams.
inline std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline double unit_double(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // uniform in [0, 1)
    double uniform() { return unit_double(next_u64()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) {
        return n == 0 ? 0 : next_u64() % n;
    }

    // Box-Muller; consumes two draws per call, no cached spare.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        double z = std::sqrt(-2.0 * std::log(u1)) *
                   std::cos(2.0 * std::numbers::pi * u2);
        return mean + stddev * z;
    }

    // Independent substream named by tag; does not advance this stream.
    Rng derive(std::string_view tag) const {
        return Rng(hash_combine(state_, hash_tag(tag)));
    }

private:
    std::uint64_t state_;
};

// Pure keyed draws (no stream state). key := fold of seed, tag, indices.
inline std::uint64_t draw_key(std::uint64_t seed, std::string_view tag,
                              std::uint64_t a = 0, std::uint64_t b = 0,
                              std::uint64_t c = 0, std::uint64_t d = 0) {
    std::uint64_t k = hash_combine(seed, hash_tag(tag));
    k = hash_combine(k, a);
    k = hash_combine(k, b);
    k = hash_combine(k, c);
    k = hash_combine(k, d);
    return k;
}

inline double keyed_uniform(std::uint64_t key) { return unit_double(mix64(key)); }

inline double keyed_normal(std::uint64_t key) {
    double u1 = unit_double(mix64(key));
    double u2 = unit_double(mix64(key + 0x632BE59BD9B4E019ULL));
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace intentsim
