#pragma once

// Random streams used by every sampling operation.
//
// Generator version 1:
//   engine    std::mt19937_64 (bit-exact by the C++ standard)
//   uniform   top 53 bits of one engine word, scaled by 2^-53 -> [0, 1)
//   gaussian  Marsaglia polar method over two uniforms mapped to (-1, 1),
//             the second variate of each accepted pair is cached
//   index     Lemire multiply-shift with rejection (unbiased)
//   sign      one bit per draw, consumed LSB first from a cached 64-bit word
//
// The std:: distributions are implementation-defined, so none are used here;
// this keeps seeded CSV output byte-identical across standard libraries on
// one platform.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace adaptsense {

using Seed = std::uint64_t;

inline constexpr int kGeneratorVersion = 1;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Splittable-counter seed derivation: folds each path component into the
/// master seed through splitmix64. derive_seed(s, {a, b}) and
/// derive_seed(s, {a, c}) are unrelated streams for b != c.
constexpr Seed derive_seed(Seed master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t component : path) {
        h = splitmix64(h ^ splitmix64(component + 0x632BE59BD9B4E019ULL));
    }
    return h;
}

class Rng {
public:
    explicit Rng(Seed seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        double v = 0.0;
        double s = 0.0;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        has_spare_ = true;
        return u * scale;
    }

    /// +1 or -1 with equal probability.
    int rademacher() {
        if (bits_left_ == 0) {
            bits_ = engine_();
            bits_left_ = 64;
        }
        const int bit = static_cast<int>(bits_ & 1U);
        bits_ >>= 1;
        --bits_left_;
        return bit != 0 ? 1 : -1;
    }

    /// Uniform on {0, ..., bound - 1}; bound must be positive.
    std::uint64_t uniform_index(std::uint64_t bound) {
        using u128 = unsigned __int128;
        std::uint64_t x = engine_();
        u128 product = static_cast<u128>(x) * bound;
        auto low = static_cast<std::uint64_t>(product);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                x = engine_();
                product = static_cast<u128>(x) * bound;
                low = static_cast<std::uint64_t>(product);
            }
        }
        return static_cast<std::uint64_t>(product >> 64);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
    std::uint64_t bits_ = 0;
    int bits_left_ = 0;
};

}  // namespace adaptsense
