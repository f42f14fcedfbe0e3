#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

namespace twrc {

// splitmix64, used to whiten seeds and derive independent substreams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d9823f58ca9939ULL;
    return x ^ (x >> 31);
}

// xoshiro256++ with hand-rolled samplers. The standard <random>
// distributions are not pinned across library versions; every sampler here
// is spelled out so that (seed, stream) -> draw sequence is bit-stable.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0,
                 std::uint64_t substream = 0) {
        std::uint64_t x = splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1);
        x ^= splitmix64(substream * 0xd1b54a32d192ed03ULL + 2);
        for (auto& w : state_) {
            x = splitmix64(x);
            w = x;
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on (0, 1]; never returns 0 so log() is always safe.
    double uniform() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double exponential(double mean) { return -mean * std::log(uniform()); }

    // Box-Muller; one normal per call, the spare is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double phi = 2.0 * M_PI * uniform();
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

    // Circularly symmetric complex Gaussian with E[|h|^2] = variance.
    std::complex<double> complex_gaussian(double variance) {
        const double s = std::sqrt(variance / 2.0);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

    // Exact Poisson sampler. Knuth multiplication for small means, with the
    // infinitely-divisible split Poisson(m) = Poisson(m/2) + Poisson(m/2)
    // keeping the product method away from underflow for large means.
    long poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean > 30.0) return poisson(mean / 2.0) + poisson(mean / 2.0);
        const double limit = std::exp(-mean);
        long k = 0;
        double p = uniform();
        while (p > limit) {
            ++k;
            p *= uniform();
        }
        return k;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace twrc
