#ifndef WAGER_RNG_HPP
#define WAGER_RNG_HPP

#include <cstdint>
#include <cmath>
#include <initializer_list>

namespace wager {

// xoshiro256++ seeded through splitmix64. Hand-rolled so that identical
// seeds give identical streams on every platform and standard library.
class RngStream {
public:
    explicit RngStream(uint64_t seed) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0,1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0,1]; safe under log() and x^(-a).
    double uniform01_open_low() { return 1.0 - uniform01(); }

    // Uniform index in [0,n).
    uint64_t below(uint64_t n) { return n <= 1 ? 0 : next_u64() % n; }

    // Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() {
        const double u1 = uniform01_open_low();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t state_[4];
};

// Deterministic substream derivation: hashing the master seed with a key
// path gives independent streams per (experiment, N, instance, ...) so
// results do not depend on scheduling or worker count.
inline uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> keys) {
    uint64_t x = master;
    (void)RngStream::splitmix64(x);
    for (uint64_t k : keys) {
        x ^= k + 0x9E3779B97F4A7C15ull + (x << 6) + (x >> 2);
        (void)RngStream::splitmix64(x);
    }
    return RngStream::splitmix64(x);
}

inline RngStream derive_stream(uint64_t master, std::initializer_list<uint64_t> keys) {
    return RngStream(derive_seed(master, keys));
}

} // namespace wager

#endif // WAGER_RNG_HPP
