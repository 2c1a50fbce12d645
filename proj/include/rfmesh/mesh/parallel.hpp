#pragma once

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rfmesh::mesh {

/// Fixed worker pool running index-parallel loops with a barrier at the end
/// of each call. With zero workers the loop runs inline on the caller.
class WorkerPool {
public:
    explicit WorkerPool(unsigned workers);
    ~WorkerPool();
    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    /// Calls fn(i) for i in [0, n); returns when all calls finished. The first
    /// exception thrown by any call is rethrown here.
    void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);
    unsigned workers() const { return static_cast<unsigned>(threads_.size()); }

private:
    void worker();

    std::vector<std::thread> threads_;
    std::mutex mu_;
    std::condition_variable start_cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::size_t)>* job_ = nullptr;
    std::size_t n_ = 0;
    std::size_t next_ = 0;
    std::size_t finished_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
    std::exception_ptr error_;
};

} // namespace rfmesh::mesh
