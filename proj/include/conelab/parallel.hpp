#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace conelab {

// Process-wide default worker count; the CLI sets this from --workers.
inline int& default_workers() {
    static int w = 1;
    return w;
}

namespace detail {
constexpr std::size_t kBlock = 1024;
inline bool& inside_worker() {
    thread_local bool flag = false;
    return flag;
}
}

// Deterministic parallel loop: the index space is cut into fixed blocks that
// workers pull from an atomic counter. Each f(i) must write only to slots
// owned by index i, so the result is identical for any worker count. Nested
// calls from inside a worker run serially.
template <class F>
void parallel_for(std::size_t n, F&& f, int workers = 0) {
    if (workers <= 0) workers = default_workers();
    if (n == 0) return;
    const std::size_t nblocks = (n + detail::kBlock - 1) / detail::kBlock;
    if (workers <= 1 || nblocks <= 1 || detail::inside_worker()) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        detail::inside_worker() = true;
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= nblocks) break;
            const std::size_t lo = b * detail::kBlock;
            const std::size_t hi = std::min(n, lo + detail::kBlock);
            for (std::size_t i = lo; i < hi; ++i) f(i);
        }
        detail::inside_worker() = false;
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
}

// Deterministic parallel sum: per-block partials are stored and then reduced
// serially in block order, so the floating-point result does not depend on
// the worker count.
template <class F>
double parallel_sum(std::size_t n, F&& per_index, int workers = 0) {
    if (n == 0) return 0.0;
    const std::size_t nblocks = (n + detail::kBlock - 1) / detail::kBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for(
        nblocks,
        [&](std::size_t b) {
            const std::size_t lo = b * detail::kBlock;
            const std::size_t hi = std::min(n, lo + detail::kBlock);
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) s += per_index(i);
            partial[b] = s;
        },
        workers);
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

// Deterministic parallel max (same block scheme).
template <class F>
double parallel_max(std::size_t n, F&& per_index, double init, int workers = 0) {
    if (n == 0) return init;
    const std::size_t nblocks = (n + detail::kBlock - 1) / detail::kBlock;
    std::vector<double> partial(nblocks, init);
    parallel_for(
        nblocks,
        [&](std::size_t b) {
            const std::size_t lo = b * detail::kBlock;
            const std::size_t hi = std::min(n, lo + detail::kBlock);
            double m = init;
            for (std::size_t i = lo; i < hi; ++i) m = std::max(m, per_index(i));
            partial[b] = m;
        },
        workers);
    double total = init;
    for (double p : partial) total = std::max(total, p);
    return total;
}

}  // namespace conelab
