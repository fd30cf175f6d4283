#pragma once

// Index-based parallel loop. Work items are keyed by index and every item
// derives its own RNG stream, so results are identical for any thread count.

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace corrspec {

template <typename Fn>
inline void parallel_for_index(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    const unsigned used = std::min<std::size_t>(threads, count);
    for (unsigned t = 0; t < used; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += used) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace corrspec
