// SPDX-License-Identifier: Apache-2.0
#ifndef LEAFLYAP_PARALLEL_HPP
#define LEAFLYAP_PARALLEL_HPP

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace leaflyap {

// Runs fn(i) for i in [0, n) on `workers` threads. Each index writes only its
// own output slot; reductions happen afterwards in index order, so results do
// not depend on the worker count.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::mutex err_mutex;
    std::exception_ptr err;
    const int w = std::min(workers, n);
    for (int r = 0; r < w; ++r) {
        pool.emplace_back([&, r]() {
            try {
                for (int i = r; i < n; i += w) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

} // namespace leaflyap

#endif
