// Copyright 2026 The eprtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace eprtomo {

/// Number of samples drawn from one generator. Every chunk of a stream has
/// its own engine, so the output does not depend on how chunks are
/// distributed over worker threads.
inline constexpr std::size_t kSampleChunk = std::size_t{1} << 16;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

using Engine = std::mt19937_64;

/// Engine for chunk `chunk` of the stream identified by `seed`.
inline Engine chunk_engine(std::uint64_t seed, std::uint64_t chunk) {
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(chunk + 0x632BE59BD9B4E019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(chunk)};
    return Engine(seq);
}

/// Runs `job(i)` for i in [0, count) on up to `threads` workers. Jobs must
/// write to disjoint outputs; the caller combines them in index order.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)> &job) {
    threads = std::max(1u, threads);
    if (threads == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    std::vector<std::exception_ptr> failures(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) job(i);
            } catch (...) {
                failures[w] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) t.join();
    for (auto &f : failures)
        if (f) std::rethrow_exception(f);
}

}  // namespace eprtomo
