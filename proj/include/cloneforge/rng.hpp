#pragma once

#include <cstdint>

namespace cloneforge {

// splitmix64. We roll our own instead of <random> so that seeded runs
// produce identical streams on every compiler/libstdc++ version.
class rng {
public:
    explicit rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, n), n >= 1; rejection-free enough for test workloads
    std::uint64_t below(std::uint64_t n) {
        // Lemire's multiply-shift reduction; slight bias is irrelevant here
        // but the mapping is fixed, which is what determinism needs.
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        return static_cast<std::uint64_t>(m >> 64);
    }

    // uniform in [lo, hi] inclusive
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool chance(std::uint32_t num, std::uint32_t den) { return below(den) < num; }

private:
    std::uint64_t state_;
};

} // namespace cloneforge
