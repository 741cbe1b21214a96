#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace spdclab {

/// Worker cap: SPDC_LAB_THREADS if set to a positive integer, else the hardware concurrency.
inline unsigned thread_cap() {
    if (const char* env = std::getenv("SPDC_LAB_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(begin, end) over contiguous slices of [0, n). Work assignment never
/// affects results: callers write disjoint outputs.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = thread_cap()) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
    if (workers == 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) t.join();
}

} // namespace spdclab
