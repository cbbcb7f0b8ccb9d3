#pragma once
#include <cstdint>
#include <functional>

namespace bogo {

// Worker count: explicit setting > BOGOLAB_THREADS env > hardware concurrency.
int thread_count();
void set_thread_count(int n);  // 0 = auto

// Static block partition of [begin,end); deterministic regardless of worker
// count as long as the body writes disjoint outputs per index.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)> &body);

}  // namespace bogo
