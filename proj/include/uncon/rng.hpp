#ifndef UNCON_RNG_HPP
#define UNCON_RNG_HPP

// Counter-based random numbers. Every draw is a pure function of
// (seed, stream, position), so per-curve streams can be generated in any
// order or in parallel and still reproduce bit-for-bit. Distributions are
// implemented here rather than taken from <random>, whose distribution
// algorithms differ between standard libraries.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace uncon {

struct Seed {
    std::uint64_t value = 0;
};

// Philox4x32-10 (Salmon et al., Random123).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

// SplitMix64 finalizer; used to derive child seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr Seed derive_seed(Seed parent, std::uint64_t tag) noexcept {
    return Seed{mix64(parent.value ^ mix64(tag))};
}

// Stream identifiers: the high 32 bits name the purpose, the low 32 bits the
// item (usually a curve index).
enum class StreamTag : std::uint32_t {
    curve = 1,
    jitter = 2,
    limits = 3,
    window = 4,
    scenario = 5,
};

constexpr std::uint64_t stream_id(StreamTag tag, std::uint32_t index) noexcept {
    return (static_cast<std::uint64_t>(tag) << 32) | index;
}

// One independent random stream. Key = seed, counter = (position, stream).
class RandomStream {
public:
    RandomStream(Seed seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

    std::uint64_t next_u64() noexcept {
        if (lane_ == 2) {
            const Philox4x32::Counter ctr{
                static_cast<std::uint32_t>(position_), static_cast<std::uint32_t>(position_ >> 32),
                static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
            const Philox4x32::Key key{static_cast<std::uint32_t>(seed_.value),
                                      static_cast<std::uint32_t>(seed_.value >> 32)};
            buffer_ = Philox4x32::block(ctr, key);
            ++position_;
            lane_ = 0;
        }
        const std::uint64_t out = (static_cast<std::uint64_t>(buffer_[2 * lane_ + 1]) << 32) |
                                  buffer_[2 * lane_];
        ++lane_;
        return out;
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n) by rejection (unbiased).
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // Box-Muller; one normal per call, the sine partner is discarded.
    double normal() noexcept {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

    // Multiplication method below rate 10, PTRS (Hoermann 1993) above.
    std::int64_t poisson(double rate) noexcept {
        if (!(rate > 0.0)) {
            return 0;
        }
        if (rate < 10.0) {
            const double floor_p = std::exp(-rate);
            std::int64_t k = 0;
            double prod = uniform();
            while (prod > floor_p) {
                ++k;
                prod *= uniform();
            }
            return k;
        }
        const double slam = std::sqrt(rate);
        const double loglam = std::log(rate);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::fabs(u);
            const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + rate + 0.43));
            if (us >= 0.07 && v <= vr) {
                return k;
            }
            if (k < 0 || (us < 0.013 && v > us)) {
                continue;
            }
            if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
                -rate + static_cast<double>(k) * loglam - std::lgamma(static_cast<double>(k) + 1.0)) {
                return k;
            }
        }
    }

private:
    Seed seed_;
    std::uint64_t stream_;
    std::uint64_t position_ = 0;
    int lane_ = 2;
    Philox4x32::Counter buffer_{};
};

}  // namespace uncon

#endif  // UNCON_RNG_HPP
