#include "mzs/parallel.hpp"

#include <algorithm>
#include <exception>
#include <mutex>

namespace mzs {

namespace {
int g_workers = 1;
}

int workerCount() { return g_workers; }

void setWorkerCount(int n) { g_workers = std::max(1, n); }

namespace {
thread_local bool t_inParallel = false;
}

void parallelFor(long long n, const std::function<void(long long)>& f) {
    if (n <= 0) return;
    const int workers = std::min<long long>(g_workers, n);
    // nested parallel sections run serially in their worker
    if (workers <= 1 || t_inParallel) {
        for (long long i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<long long> cursor{0};
    std::exception_ptr error;
    std::mutex errorMutex;
    auto body = [&] {
        t_inParallel = true;
        const long long chunk = std::max<long long>(1, n / (workers * 8));
        while (true) {
            const long long start = cursor.fetch_add(chunk);
            if (start >= n) return;
            const long long end = std::min(n, start + chunk);
            try {
                for (long long i = start; i < end; ++i) f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(errorMutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace mzs
