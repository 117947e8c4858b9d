#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace xpm {

// Worker count from XPM_WORKERS, else the hardware concurrency.
inline unsigned default_workers() {
    if (const char* env = std::getenv("XPM_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {
inline thread_local bool in_pool = false;
}

// Runs fn(i) for i in [0, n) on a bounded pool. Results must be written by
// index so output order never depends on scheduling. The exception thrown for
// the lowest index is rethrown after all workers finish. Calls made from inside
// a pool worker run serially.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned workers = default_workers()) {
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1 || detail::in_pool) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mutex;
    std::exception_ptr error;
    std::size_t error_index = n;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                detail::in_pool = true;
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(mutex);
                        if (i < error_index) {
                            error_index = i;
                            error = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace xpm
