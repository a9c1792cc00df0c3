#pragma once

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace jutila {

inline int default_threads() {
    if (const char* env = std::getenv("JUTILA_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : int(hc);
}

// Static chunking: the chunk layout depends only on n and chunk size, never on
// the thread count, and results are combined in index order. Output is
// therefore identical for any `threads`.
template <class T, class ChunkFn>
std::vector<T> parallel_map_chunks(std::int64_t n, std::int64_t chunk, int threads,
                                   ChunkFn&& fn) {
    if (chunk < 1) chunk = 1;
    std::int64_t nchunks = (n + chunk - 1) / chunk;
    std::vector<T> results(static_cast<std::size_t>(nchunks));
    if (nchunks == 0) return results;
    threads = int(std::min<std::int64_t>(threads < 1 ? 1 : threads, nchunks));
    if (threads == 1) {
        for (std::int64_t c = 0; c < nchunks; ++c)
            results[size_t(c)] = fn(c * chunk, std::min(n, (c + 1) * chunk));
        return results;
    }
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::int64_t c = t; c < nchunks; c += threads)
                    results[size_t(c)] = fn(c * chunk, std::min(n, (c + 1) * chunk));
            } catch (...) {
                errs[size_t(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e && !first_error) first_error = e;
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

template <class Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
    parallel_map_chunks<int>(n, 1, threads, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) fn(i);
        return 0;
    });
}

}  // namespace jutila
