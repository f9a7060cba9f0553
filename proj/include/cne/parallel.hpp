#ifndef CNE_PARALLEL_HPP
#define CNE_PARALLEL_HPP

#include "types.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace cne {

/**
 * Number of chunks used when results must not depend on the thread count.
 */
inline constexpr int deterministic_chunks = 8;

inline unsigned default_workers() {
    return std::max(1u, std::thread::hardware_concurrency());
}

/**
 * Split `[0, n)` into `chunks` contiguous ranges and call `fn(chunk, begin, end)`
 * for each, using up to `workers` threads. Exceptions from any chunk are rethrown.
 */
template<typename Function>
void parallel_chunks(Index n, int chunks, unsigned workers, Function fn) {
    chunks = std::max(1, chunks);
    auto bounds = [&](int c) { return n * c / chunks; };
    if (workers <= 1 || chunks == 1) {
        for (int c = 0; c < chunks; ++c) {
            fn(c, bounds(c), bounds(c + 1));
        }
        return;
    }

    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chunks));
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(static_cast<int>(workers), chunks);
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t]() {
            for (int c = t; c < chunks; c += n_threads) {
                try {
                    fn(c, bounds(c), bounds(c + 1));
                } catch (...) {
                    errors[static_cast<std::size_t>(c)] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}

#endif
