#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace gvspec::detail {

inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Splits [0, count) into contiguous chunks and runs `fn(begin, end)` on each,
/// one thread per chunk. Chunk boundaries depend only on `count` and the
/// thread count, and each index is handled by exactly one call, so any `fn`
/// that writes only to its own indices gives schedule-independent results.
/// The first exception thrown by a worker is rethrown on the caller.
template <class Fn>
void parallel_for_chunks(std::size_t count, unsigned threads, Fn&& fn) {
    if (count == 0) return;
    const std::size_t workers = std::min<std::size_t>(resolve_threads(threads), count);
    if (workers <= 1) {
        fn(std::size_t{0}, count);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t base = count / workers;
    const std::size_t extra = count % workers;
    std::size_t begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t end = begin + base + (w < extra ? 1 : 0);
        pool.emplace_back([&, w, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace gvspec::detail
