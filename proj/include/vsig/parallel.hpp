#pragma once

/// Deterministic index-parallel loop capped by the VSIG_THREADS environment variable.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace vsig {

inline unsigned thread_limit() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("VSIG_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) n = static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return n;
}

/// Calls f(i) for i in [0, n). Each index runs exactly once; callers write results by index.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_limit(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace vsig
