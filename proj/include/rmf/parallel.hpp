#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rmf {

// Splits [0, total) into fixed-size chunks and calls fn(chunk_index, begin, end)
// for each. Chunk boundaries depend only on chunk_size, never on the thread
// count, so per-chunk results merged in chunk order are reproducible for any
// number of workers.
template <class Fn>
void for_each_chunk(std::uint64_t total, std::uint64_t chunk_size, unsigned threads, Fn&& fn) {
    if (total == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::uint64_t num_chunks = (total + chunk_size - 1) / chunk_size;
    if (threads <= 1 || num_chunks == 1) {
        for (std::uint64_t c = 0; c < num_chunks; ++c) {
            const std::uint64_t b = c * chunk_size;
            fn(c, b, std::min(total, b + chunk_size));
        }
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        try {
            for (;;) {
                const std::uint64_t c = next.fetch_add(1, std::memory_order_relaxed);
                if (c >= num_chunks) return;
                const std::uint64_t b = c * chunk_size;
                fn(c, b, std::min(total, b + chunk_size));
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            next.store(num_chunks, std::memory_order_relaxed);
        }
    };
    std::vector<std::thread> pool;
    const unsigned n_workers = std::min<std::uint64_t>(threads, num_chunks);
    pool.reserve(n_workers);
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rmf
