#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace reachprob {

/// Number of worker threads to use: `requested` if positive, otherwise the
/// hardware concurrency (at least 1).
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs body(begin, end) over a static partition of [0, n) on `threads`
/// workers. The partition depends only on (n, threads); bodies must write
/// disjoint outputs. Exceptions from workers are rethrown on the caller.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t)>& body) {
    int t = resolve_threads(threads);
    if (n == 0) return;
    if (t <= 1 || n == 1) {
        body(0, n);
        return;
    }
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(t), n);
    std::size_t chunk = n / workers;
    std::size_t rem = n % workers;

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    std::size_t begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t len = chunk + (w < rem ? 1 : 0);
        std::size_t end = begin + len;
        pool.emplace_back([&, w, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace reachprob
