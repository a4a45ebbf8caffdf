#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace ctrldiff {

/// Splits [0, n) into contiguous chunks, one worker thread per chunk.
/// Results are bit-reproducible for any worker count provided the body only
/// writes slots indexed by its own iteration.
template <class Fn>
void parallel_for(std::int64_t n, int workers, Fn&& fn) {
    if (n <= 0) return;
    int w = workers > 0 ? workers : int(std::thread::hardware_concurrency());
    if (w < 1) w = 1;
    if (w > n) w = int(n);
    if (w == 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::int64_t chunk = (n + w - 1) / w;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(w));
    for (int t = 0; t < w; ++t) {
        const std::int64_t b = t * chunk;
        const std::int64_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] {
            for (std::int64_t i = b; i < e; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// Fixed-shape pairwise reduction; deterministic and more accurate than a
/// running sum for long accumulations.
inline double pairwise_sum(const double* v, std::int64_t n) {
    if (n <= 4) {
        double s = 0.0;
        for (std::int64_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::int64_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), std::int64_t(v.size()));
}

}  // namespace ctrldiff
