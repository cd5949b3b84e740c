// Copyright 2026 The iALS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ials {

namespace detail {
inline std::size_t& thread_override() {
    static std::size_t n = 0;
    return n;
}
}  // namespace detail

/// Number of worker threads used by parallel_for. Defaults to the
/// IALS_NUM_THREADS environment variable, then hardware concurrency.
inline std::size_t num_threads() {
    if (detail::thread_override() > 0) return detail::thread_override();
    if (const char* env = std::getenv("IALS_NUM_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

inline void set_num_threads(std::size_t n) { detail::thread_override() = n; }

/// Runs fn(begin, end) over contiguous ranges covering [0, n). Each index is
/// visited exactly once; callers must only write state owned by the index.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    if (n == 0) return;
    const std::size_t workers = std::min(num_threads(), n);
    if (workers <= 1) {
        fn(std::size_t{0}, n);
        return;
    }
    // Small chunks balance the skewed per-entity costs of power-law data.
    const std::size_t chunk = std::max<std::size_t>(1, n / (workers * 16));
    std::size_t next = 0;
    std::mutex mu;
    std::exception_ptr error;
    auto worker = [&] {
        for (;;) {
            std::size_t begin;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next >= n || error) return;
                begin = next;
                next = std::min(n, next + chunk);
            }
            try {
                fn(begin, std::min(n, begin + chunk));
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace ials
