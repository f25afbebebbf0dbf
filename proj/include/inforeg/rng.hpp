#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace inforeg {

// splitmix64 finalizer; good enough to decorrelate structured seed inputs.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive an independent stream seed from a base seed and up to two tags
/// (trial index, purpose, restart index, ...). Streams with distinct tags
/// never share state.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag_a = 0,
                                 std::uint64_t tag_b = 0) {
    std::uint64_t s = splitmix64(base ^ 0x6a09e667f3bcc908ULL);
    s = splitmix64(s ^ (tag_a + 0x9e3779b97f4a7c15ULL));
    s = splitmix64(s ^ (tag_b + 0x517cc1b727220a95ULL));
    return s;
}

/// mt19937_64 engine with hand-rolled real-valued transforms, so sample
/// sequences depend only on the seed (std distributions are unspecified).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform index in [0, n).
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace inforeg
