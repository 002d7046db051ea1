#pragma once

#include <cstdint>

namespace dnl {

// splitmix64. The audits and experiment tables promise byte-identical reruns
// for a fixed seed, so sampling must not depend on the standard library's
// distribution implementations; this generator plus the explicit mappings
// below give the same stream on every platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in {lo, ..., hi} inclusive.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next() % span);
    }

    bool bernoulli(double prob) { return uniform01() < prob; }

    // Derive an independent stream seed, used to keep parallelizable trial
    // loops reproducible regardless of execution order.
    static std::uint64_t substream(std::uint64_t seed, std::uint64_t stream) {
        SplitMix64 g(seed ^ (0x7f4a7c15ull + 0x9e3779b9ull * (stream + 1)));
        g.next();
        return g.next();
    }

private:
    std::uint64_t state_;
};

}  // namespace dnl
