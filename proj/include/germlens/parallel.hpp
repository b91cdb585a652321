#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace germlens {

/// Process-wide worker cap; 0 means hardware concurrency.
inline std::atomic<unsigned>& thread_cap()
{
    static std::atomic<unsigned> cap{0};
    return cap;
}

inline unsigned worker_count()
{
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned cap = thread_cap().load();
    return cap == 0 ? hw : std::min(cap, hw);
}

/// Runs fn(i) for i in [0, n). Results must be written to slot i so the merge order is fixed.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn)
{
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace germlens
