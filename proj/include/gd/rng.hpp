#pragma once

#include <cmath>
#include <cstdint>

namespace gd {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Counter-based generator: draw n is mix64(seed + (n+1)*golden), the
// splitmix64 sequence. Same seed gives the same stream on every platform.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() {
        ++counter_;
        return detail::mix64(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller; consumes exactly two uniforms
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // uniform integer in [0, n), n >= 1
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    // independent substream keyed by (seed, stream)
    SeededRng derive(std::uint64_t stream) const {
        return SeededRng(detail::mix64(seed_ ^ (stream + 0x9E3779B97F4A7C15ULL)));
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace gd
