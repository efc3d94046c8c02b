#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace burstnet {

/// Worker count from an explicit request, else BURSTNET_THREADS, else hardware concurrency.
int resolve_threads(int requested = 0);

/// Process-wide default used by library calls that do not take an explicit thread count.
void set_default_threads(int threads);
int default_threads();

/// Runs fn(i) for i in [0, n) across `threads` workers with dynamic chunking.
/// Callers write results into slot i, so output order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, int threads = 0) {
    if (threads <= 0) {
        threads = default_threads();
    }
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::size_t chunk = std::max<std::size_t>(1, n / (workers * 16));
    auto body = [&] {
        for (;;) {
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= n) {
                return;
            }
            const std::size_t end = std::min(n, begin + chunk);
            try {
                for (std::size_t i = begin; i < end; ++i) {
                    fn(i);
                }
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(std::min(workers, n) - 1);
    for (std::size_t w = 1; w < std::min(workers, n); ++w) {
        pool.emplace_back(body);
    }
    body();
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace burstnet
