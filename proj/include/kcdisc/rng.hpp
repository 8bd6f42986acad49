#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace kcdisc {

// SplitMix64 viewed as a counter-based generator: draw k of a stream is
// mix(seed + (k + 1) * golden_gamma). All distributions below are built from
// it directly so streams are identical across standard libraries.
class Rng {
public:
    static constexpr const char* kAlgorithm = "splitmix64-counter/v1";

    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64();
    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Standard normal via Box-Muller (one output per pair of uniforms).
    double normal();
    // Uniform integer in [lo, hi], by rejection.
    int uniform_int(int lo, int hi);
    bool coin() { return (next_u64() >> 63) != 0; }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<int>(i) - 1));
            std::swap(items[i - 1], items[j]);
        }
    }

    // Independent stream keyed by (seed, stream id).
    Rng split(std::uint64_t stream) const;

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

}  // namespace kcdisc
