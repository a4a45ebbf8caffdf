#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ctrldiff {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
// A draw is a pure function of (key, counter), so parallel schedules cannot
// perturb the stream: simulations key the counter by (path, step, block).
namespace philox {

inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
inline constexpr std::uint32_t kMult0 = 0xD2511F53u;
inline constexpr std::uint32_t kMult1 = 0xCD9E8D57u;

inline void round_once(std::array<std::uint32_t, 4>& ctr, const std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = std::uint64_t(kMult0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(kMult1) * ctr[2];
    const std::uint32_t lo0 = std::uint32_t(p0), hi0 = std::uint32_t(p0 >> 32);
    const std::uint32_t lo1 = std::uint32_t(p1), hi1 = std::uint32_t(p1 >> 32);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

inline std::array<std::uint32_t, 4> block(std::uint64_t seed, std::array<std::uint32_t, 4> ctr) {
    std::array<std::uint32_t, 2> key = {std::uint32_t(seed), std::uint32_t(seed >> 32)};
    for (int r = 0; r < 10; ++r) {
        round_once(ctr, key);
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

}  // namespace philox

/// Stateless stream of N(0,1) pairs and U(0,1) draws addressed by
/// (seed; path, step, block). Uniform draws live in a disjoint block range so
/// adding them never shifts the normal stream.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Two independent standard normals (Box-Muller on one Philox block).
    std::array<double, 2> normal_pair(std::uint64_t path, std::uint32_t step,
                                      std::uint32_t block) const {
        const auto w = words(path, step, block);
        const double u1 = to_unit(w[0]);
        const double u2 = to_unit(w[1]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(th), r * std::sin(th)};
    }

    /// Uniform in (0,1); block index is namespaced away from normal blocks.
    double uniform(std::uint64_t path, std::uint32_t step, std::uint32_t block) const {
        const auto w = words(path, step, 0x80000000u | block);
        return to_unit(w[0]);
    }

    /// Derive an unrelated child seed (per rung, per worker, ...).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
        // splitmix64 finalizer over seed ^ salt
        std::uint64_t z = seed ^ (salt + 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::array<std::uint32_t, 4> words(std::uint64_t path, std::uint32_t step,
                                       std::uint32_t block) const {
        return philox::block(seed_, {step, block, std::uint32_t(path), std::uint32_t(path >> 32)});
    }

    static double to_unit(std::uint32_t x) { return (double(x) + 0.5) * 0x1p-32; }

    std::uint64_t seed_;
};

}  // namespace ctrldiff
