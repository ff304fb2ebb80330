#pragma once

#include <cmath>
#include <cstdint>

namespace hepchain {

/// SplitMix64 engine (Steele, Lea, Flood). Every random draw in the
/// simulator comes from one of these, keyed by a deterministic stream id.
class SplitMix64 {
  public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t operator()()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~0ull; }

    /// Uniform in the open interval (0, 1).
    double open_unit() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    /// Uniform in [0, 1).
    double unit() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    /// Standard normal via Box-Muller; consumes exactly two draws.
    double normal()
    {
        double u1 = open_unit();
        double u2 = unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Unbiased integer in [0, n) by rejection. n must be > 0.
    std::uint64_t below(std::uint64_t n)
    {
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t x = (*this)();
            if (x >= threshold) return x % n;
        }
    }

    bool bernoulli(double p) { return unit() < p; }

  private:
    std::uint64_t state_;
};

/// The splitmix64 output finalizer applied to a single value.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Stream key: mix64(mix64(mix64(seed) ^ a) ^ b). Distinct (a, b) under one
/// seed give statistically independent SplitMix64 streams.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b)
{
    return mix64(mix64(mix64(seed) ^ a) ^ b);
}

} // namespace hepchain
