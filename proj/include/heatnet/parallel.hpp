#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace heatnet {

/// Number of worker threads. Honors the HEATNET_WORKERS environment
/// variable, otherwise falls back to the hardware concurrency.
inline int worker_count() {
    if (const char* env = std::getenv("HEATNET_WORKERS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n) on up to worker_count() threads.
///
/// Each index must write only to its own output slots; under that contract
/// the result is bit-identical for any worker count or schedule. Reductions
/// are the caller's job and must happen in a fixed order afterwards.
inline void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn,
                         std::int64_t grain = 16) {
    if (n <= 0) return;
    int workers = worker_count();
    if (workers <= 1 || n <= grain) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    auto run = [&] {
        for (;;) {
            std::int64_t lo = next.fetch_add(grain);
            if (lo >= n) return;
            std::int64_t hi = lo + grain < n ? lo + grain : n;
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
}

}  // namespace heatnet
