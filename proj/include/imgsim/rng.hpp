#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace imgsim {

/// Deterministic random stream, one per consumer (arrivals, image choice,
/// tie-break, piece selection). The (seed, label) pair fully determines the
/// draw sequence; mt19937_64 output is specified by the standard, so the
/// sequence is identical on every platform. Distribution sampling below is
/// hand-rolled (the std distributions are implementation-defined).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view label)
        : gen_(mix(seed, label)) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n), unbiased via rejection.
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    /// Exponential with the given mean.
    double exponential(double mean) {
        double u;
        do {
            u = next_double();
        } while (u == 0.0);
        return -mean * std::log(u);
    }

private:
    static std::uint64_t mix(std::uint64_t seed, std::string_view label) {
        // FNV-1a over the label, then a splitmix64 round to decorrelate
        // nearby seeds.
        std::uint64_t h = 14695981039346656037ull;
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        std::uint64_t z = seed ^ h;
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::mt19937_64 gen_;
};

}  // namespace imgsim
