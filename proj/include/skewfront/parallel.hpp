#pragma once

// Chunked parallel map with a deterministic reduction order. Work is split into
// fixed-size chunks, threads grab whole chunks, and chunk results are combined
// in chunk order, so results do not depend on the thread count.

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace skewfront {

inline unsigned default_thread_count() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

/// Runs `body(chunk_index, begin, end)` for every chunk of [0, n); results must
/// be written into per-chunk slots by the body.
template <typename Body>
void for_each_chunk(std::size_t n, std::size_t chunk_size, unsigned threads, Body&& body) {
    if (n == 0) return;
    const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
    if (threads <= 1 || n_chunks == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            body(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            body(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        }
    };
    std::vector<std::thread> pool;
    const unsigned use = std::min<std::size_t>(threads, n_chunks);
    pool.reserve(use);
    for (unsigned t = 0; t < use; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

} // namespace skewfront
