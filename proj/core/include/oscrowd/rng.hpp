#pragma once

#include <cmath>
#include <cstdint>

namespace oscrowd {

// Seeded generator used everywhere in the engine. All distribution
// transforms are hand-rolled (splitmix64 core, Box-Muller normals) so
// that a seed produces bit-identical streams on every platform and
// standard library.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive on both ends
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
    }

    double normal() {
        constexpr double two_pi = 6.283185307179586476925286766559;
        double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Independent substream; does not advance this generator.
    Rng fork(uint64_t stream) const {
        uint64_t z = state_ ^ (0x9e3779b97f4a7c15ull * (stream + 1));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return Rng(z ^ (z >> 31));
    }

private:
    uint64_t state_;
};

}  // namespace oscrowd
