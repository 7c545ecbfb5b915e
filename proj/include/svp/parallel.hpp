#ifndef SVP_PARALLEL_HPP
#define SVP_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace svp {

/// Global worker count used by parallel_for when none is given.
/// Set once at startup (e.g. from the CLI --threads flag).
inline int& thread_count() {
    static int n = static_cast<int>(std::thread::hardware_concurrency());
    return n;
}

/// Chunked parallel loop over [begin, end). The body receives one index.
/// Falls back to a serial loop for small ranges or a single worker.
template <class F>
void parallel_for(std::size_t begin, std::size_t end, F&& body, int nthreads = 0) {
    if (nthreads <= 0) nthreads = thread_count();
    const std::size_t n = end > begin ? end - begin : 0;
    if (n == 0) return;
    if (nthreads <= 1 || n < 2) {
        for (std::size_t i = begin; i < end; ++i) body(i);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(nthreads), n);
    std::atomic<std::size_t> next{begin};
    // grain keeps scheduling overhead negligible for fine-grained bodies
    const std::size_t grain = std::max<std::size_t>(1, n / (8 * nt));
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t lo = next.fetch_add(grain);
                if (lo >= end) break;
                const std::size_t hi = std::min(end, lo + grain);
                for (std::size_t i = lo; i < hi; ++i) body(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace svp

#endif
