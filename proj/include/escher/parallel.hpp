#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace escher {

// Worker cap from ESCHER_TILE_THREADS; defaults to 1 (serial). Work items are
// partitioned by index so results never depend on the thread count.
inline int worker_count() {
    const char* env = std::getenv("ESCHER_TILE_THREADS");
    if (!env) return 1;
    const int v = std::atoi(env);
    if (v < 1) return 1;
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    return hw > 0 ? std::min(v, hw) : v;
}

template <class Fn>
void parallel_for(int count, Fn&& fn) {
    const int workers = std::min(worker_count(), count > 0 ? count : 1);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            for (int i = w; i < count; i += workers) fn(i);
        });
    }
    for (auto& t : threads) t.join();
}

}  // namespace escher
