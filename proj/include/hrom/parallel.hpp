#ifndef HROM_PARALLEL_HPP
#define HROM_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace hrom
{

/// Worker count: HROM_THREADS if set to a positive integer, otherwise the
/// hardware concurrency.
inline int thread_count()
{
    if (const char* env = std::getenv("HROM_THREADS"))
    {
        const int n = std::atoi(env);
        if (n > 0)
            return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

///
/// Calls `body(begin, end)` on contiguous, statically partitioned ranges of
/// [0, n). The partition depends only on n and the worker count, so results
/// are deterministic as long as ranges write disjoint outputs.
///
template <typename Body>
void parallel_for(Eigen::Index n, Body&& body)
{
    const Eigen::Index workers =
        std::min<Eigen::Index>(n, static_cast<Eigen::Index>(thread_count()));
    if (workers <= 1)
    {
        if (n > 0)
            body(Eigen::Index(0), n);
        return;
    }

    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const Eigen::Index chunk = (n + workers - 1) / workers;
    for (Eigen::Index w = 0; w < workers; ++w)
    {
        const Eigen::Index begin = w * chunk;
        const Eigen::Index end = std::min(n, begin + chunk);
        if (begin >= end)
            break;
        pool.emplace_back([&, begin, end] {
            try
            {
                body(begin, end);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace hrom

#endif /* HROM_PARALLEL_HPP */
