#include "bogo/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace bogo {

static std::atomic<int> g_threads{0};

void set_thread_count(int n) { g_threads.store(n < 0 ? 0 : n); }

int thread_count() {
    int n = g_threads.load();
    if (n > 0) return n;
    if (const char *env = std::getenv("BOGOLAB_THREADS")) {
        int e = std::atoi(env);
        if (e > 0) return e;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)> &body) {
    std::int64_t count = end - begin;
    if (count <= 0) return;
    int workers = thread_count();
    if (workers <= 1 || count == 1) {
        for (std::int64_t i = begin; i < end; ++i) body(i);
        return;
    }
    if (workers > count) workers = int(count);
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    std::int64_t chunk = (count + workers - 1) / workers;
    for (int w = 1; w < workers; ++w) {
        std::int64_t lo = begin + w * chunk, hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::int64_t i = lo; i < hi; ++i) body(i);
        });
    }
    std::int64_t hi0 = std::min(end, begin + chunk);
    for (std::int64_t i = begin; i < hi0; ++i) body(i);
    for (auto &t : pool) t.join();
}

}  // namespace bogo
