#ifndef PHLAB_SWEEP_HPP
#define PHLAB_SWEEP_HPP

#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

// Deterministic data-parallel loop: indices are partitioned statically by
// index modulo thread count, and each index writes only its own result
// slot, so results are independent of the number of worker threads.

namespace phlab {

/// Effective thread count: n if > 0, else PHONON_LAB_THREADS, else
/// hardware_concurrency.
inline unsigned resolve_threads(unsigned n) {
    if (n > 0) return n;
    if (const char* env = std::getenv("PHONON_LAB_THREADS")) {
        long v = std::atol(env);
        if (v > 0) return unsigned(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = resolve_threads(threads);
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([=, &fn] {
            for (std::size_t i = t; i < n; i += threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// First exception thrown inside a parallel_for body, if any, rethrown on
/// the calling thread.
template <class Fn>
void parallel_for_checked(std::size_t n, unsigned threads, Fn&& fn) {
    std::exception_ptr err;
    std::mutex m;
    parallel_for(n, threads, [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(m);
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);
}

}  // namespace phlab

#endif
