#include "kcdisc/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kcdisc {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t Rng::next_u64() {
    ++counter_;
    return splitmix64_mix(seed_ + counter_ * kGamma);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::uniform_int(int lo, int hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw = next_u64();
    while (draw >= limit) draw = next_u64();
    return static_cast<int>(static_cast<std::int64_t>(lo) + static_cast<std::int64_t>(draw % span));
}

Rng Rng::split(std::uint64_t stream) const { return Rng(splitmix64_mix(seed_ ^ splitmix64_mix(stream + kGamma))); }

}  // namespace kcdisc
