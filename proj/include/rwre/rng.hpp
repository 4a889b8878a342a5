#pragma once

#include <cmath>
#include <cstdint>

namespace rwre {

// Counter-based generator: the n-th output of a stream is a pure function of
// (seed, stream, n), so parallel consumers are reproducible and merge-order
// independent. The output function is the SplitMix64 finalizer over a Weyl
// sequence keyed by (seed, stream).
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(derive_key(seed, stream)), counter_(0) {}

    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
        return mix(seed ^ mix(stream + 0x9E3779B97F4A7C15ULL));
    }

    std::uint64_t next_u64() {
        return mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL);
    }

    // uniform in [0,1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in {0, ..., n-1}; n must be small relative to 2^64 (no
    // rejection; modulo bias < n / 2^64, negligible for n <= 2^32)
    std::uint64_t next_below(std::uint64_t n) {
        // fixed-point multiply keeps the distribution closer to uniform
        // than plain modulo
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    double next_normal() {
        // Box-Muller; one variate per call, second discarded to keep the
        // counter advance pattern simple
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

    // Marsaglia-Tsang; for alpha < 1 uses the boost gamma(alpha+1)*U^(1/alpha)
    double next_gamma(double alpha) {
        if (alpha < 1.0) {
            double u = next_double();
            while (u <= 0.0) u = next_double();
            return next_gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = next_normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = next_double();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v;
        }
    }

    std::uint64_t counter() const { return counter_; }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace rwre
