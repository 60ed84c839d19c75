#pragma once

#include <cstdint>
#include <initializer_list>

namespace abstain {

// Deterministic, platform-independent generator (splitmix64). Every stochastic
// component in the library draws through this class so that a (config, seed)
// pair reproduces bit-identical results on any machine. std::mt19937 would be
// portable too, but the standard distributions on top of it are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Unbiased uniform index in [0, n). Rejection sampling, n >= 1.
    std::size_t next_index(std::size_t n) {
        const std::uint64_t nn = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = ~0ULL - ~0ULL % nn;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return static_cast<std::size_t>(x % nn);
    }

    bool next_bool(double p) { return next_double() < p; }

    // Stable hash-combine for seed hierarchies: sub-streams derived from
    // (seed, coordinates...) are independent of evaluation order.
    static std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
        std::uint64_t h = seed ^ 0xd6e8feb86659fd93ULL;
        for (std::uint64_t c : coords) {
            h ^= c + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
            h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
            h ^= h >> 31;
        }
        return h;
    }

private:
    std::uint64_t state_;
};

} // namespace abstain
