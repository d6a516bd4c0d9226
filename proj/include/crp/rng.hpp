#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace crp {

/// splitmix64 step; used to mix seeds and derive per-instance streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mixSeed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    return splitmix64(s);
}

/// Deterministic RNG with portable bounded draws. std::uniform_int_distribution
/// is not pinned down by the standard, so all draws go through our own
/// rejection sampling; outputs are identical across compilers and platforms.
/// Stream: mt19937_64 seeded through splitmix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        engine_.seed(splitmix64(s));
    }

    std::uint64_t nextU64() { return engine_(); }

    /// Uniform in [lo, hi], inclusive. Requires lo <= hi.
    std::int64_t uniformInt(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range == 0) // full 64-bit range
            return static_cast<std::int64_t>(nextU64());
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
        std::uint64_t value;
        do {
            value = nextU64();
        } while (value >= limit);
        return lo + static_cast<std::int64_t>(value % range);
    }

    std::size_t index(std::size_t size) {
        return static_cast<std::size_t>(uniformInt(0, static_cast<std::int64_t>(size) - 1));
    }

    /// Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(nextU64() >> 11) * 0x1.0p-53;
    }

    bool chance(double probability) { return uniform01() < probability; }

    /// Fisher-Yates; deterministic counterpart of std::shuffle.
    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace crp
