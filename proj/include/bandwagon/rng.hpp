#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace bandwagon {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based seed derivation. The result depends on the base seed and the
/// ordered list of ids only, so runs and cells can be simulated in any order.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> ids) noexcept {
    std::uint64_t h = splitmix64(base);
    for (auto id : ids) h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
    return h;
}

/// Per-run generator: std::mt19937_64 with a 53-bit uniform mapping that does
/// not depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0,1).
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double prob) noexcept { return uniform() < prob; }

    std::uint64_t next() noexcept { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace bandwagon
