#ifndef MZS_PARALLEL_HPP
#define MZS_PARALLEL_HPP

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace mzs {

// Process-wide worker count for parallel sections (CLI sets this once).
int workerCount();
void setWorkerCount(int n);

// Runs f(i) for i in [0, n) across the configured workers.  Work is handed
// out in fixed chunks through an atomic cursor; each result slot is written
// by exactly one invocation, so any ordered combine over the output array is
// independent of the worker count.
void parallelFor(long long n, const std::function<void(long long)>& f);

// Deterministic reduction: evaluates item(i) into a dense buffer via
// parallelFor, then folds the buffer strictly in index order.
template <typename T, typename Fold>
T parallelMapReduce(long long n, T init, const std::function<T(long long)>& item, Fold fold) {
    std::vector<T> buf(static_cast<size_t>(n));
    parallelFor(n, [&](long long i) { buf[static_cast<size_t>(i)] = item(i); });
    T acc = init;
    for (auto& v : buf) acc = fold(acc, v);
    return acc;
}

}  // namespace mzs

#endif
