#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace bpmap {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Work is striped by
/// index; results must be written to per-index slots so the outcome does not
/// depend on scheduling.
inline void parallel_for(int64_t n, int workers, const std::function<void(int64_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    int w = std::min<int64_t>(workers, n);
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (int t = 0; t < w; ++t)
        threads.emplace_back([&, t] {
            for (int64_t i = t; i < n; i += w) fn(i);
        });
    for (auto& th : threads) th.join();
}

}  // namespace bpmap
