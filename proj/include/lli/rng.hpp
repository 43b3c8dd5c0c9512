#pragma once

#include <cmath>
#include <cstdint>

namespace lli {

// splitmix64: tiny, seedable, stable across platforms. All randomness in the
// toolkit flows through explicit seeds and this generator.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in the open interval (-1, 1)
    double uniform_sym() {
        double u;
        do {
            u = 2.0 * uniform01() - 1.0;
        } while (u <= -1.0 || u >= 1.0);
        return u;
    }

    // standard normal, Marsaglia polar method
    double normal() {
        double x, y, s;
        do {
            x = uniform_sym();
            y = uniform_sym();
            s = x * x + y * y;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        return x * f;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    std::uint64_t below(std::uint64_t bound) { return next() % bound; }
};

// Derive independent substreams from a master seed.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
    Rng r(master ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
    return r.next();
}

}  // namespace lli
