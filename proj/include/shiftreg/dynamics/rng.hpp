#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace shiftreg::dynamics {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent, reproducible stream for (seed, atom, purpose). Purposes keep
// sampling, propagation epochs and readout from sharing draws.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index, std::uint64_t purpose = 0)
{
    const std::uint64_t h = splitmix64(splitmix64(splitmix64(seed) ^ index) ^ (purpose * 0x2545f4914f6cdd1dULL));
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(purpose)};
    return std::mt19937_64(seq);
}

// Uniform in [0, 1) with 53 random bits; identical on every platform, unlike
// std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

// Box-Muller pair, again to stay independent of the standard library's
// distribution implementation.
class Gaussian {
public:
    double operator()(std::mt19937_64& g)
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01(g);
        while (u1 <= 0.0)
            u1 = uniform01(g);
        const double u2 = uniform01(g);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace shiftreg::dynamics
