#include "pkgrid/execution.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/partitioner.h>
#include <tbb/task_arena.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace pkgrid
{
ExecutionPolicy parseHostPolicy(const std::string &name, int threads)
{
    if (name == "seq" || name == "sequential")
        return ExecutionPolicy::sequential();
    if (name == "par" || name == "parallel")
        return ExecutionPolicy::parallelHost(std::max(1, threads));
    throw std::invalid_argument("unknown execution policy '" + name + "' (expected seq or par)");
}

std::size_t parallelChunkSize(std::size_t n, int workers)
{
    const std::size_t divisor = 8 * static_cast<std::size_t>(std::max(1, workers));
    return std::max<std::size_t>(1, n / divisor);
}

namespace
{
tbb::task_arena &arenaFor(int threads)
{
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<tbb::task_arena>> arenas;
    std::lock_guard<std::mutex> lock(mutex);
    auto &arena = arenas[threads];
    if (!arena)
        arena = std::make_unique<tbb::task_arena>(threads);
    return *arena;
}
} // namespace

void parallelChunks(const ExecutionPolicy &policy, std::size_t n,
                    const std::function<void(std::size_t, std::size_t)> &body)
{
    if (n == 0)
        return;
    if (policy.kind != ExecutionKind::ParallelHost || policy.threads <= 1)
    {
        body(0, n);
        return;
    }
    const std::size_t chunk = parallelChunkSize(n, policy.threads);
    arenaFor(policy.threads)
        .execute(
            [&]
            {
                tbb::parallel_for(
                    tbb::blocked_range<std::size_t>(0, n, chunk),
                    [&](const tbb::blocked_range<std::size_t> &r)
                    { body(r.begin(), r.end()); },
                    tbb::simple_partitioner());
            });
}
} // namespace pkgrid
