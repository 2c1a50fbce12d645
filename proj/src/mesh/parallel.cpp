#include "rfmesh/mesh/parallel.hpp"

namespace rfmesh::mesh {

WorkerPool::WorkerPool(unsigned workers)
{
    for (unsigned k = 0; k < workers; ++k) threads_.emplace_back([this] { worker(); });
}

WorkerPool::~WorkerPool()
{
    {
        std::lock_guard lock(mu_);
        stop_ = true;
    }
    start_cv_.notify_all();
    for (auto& t : threads_) t.join();
}

void WorkerPool::parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn)
{
    if (threads_.empty() || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::unique_lock lock(mu_);
    job_ = &fn;
    n_ = n;
    next_ = 0;
    finished_ = 0;
    error_ = nullptr;
    ++generation_;
    start_cv_.notify_all();
    // The caller works too.
    while (next_ < n_) {
        const std::size_t i = next_++;
        lock.unlock();
        try {
            fn(i);
        } catch (...) {
            std::lock_guard g(mu_);
            if (!error_) error_ = std::current_exception();
        }
        lock.lock();
        ++finished_;
    }
    done_cv_.wait(lock, [this] { return finished_ == n_; });
    job_ = nullptr;
    if (error_) std::rethrow_exception(error_);
}

void WorkerPool::worker()
{
    std::uint64_t seen = 0;
    std::unique_lock lock(mu_);
    for (;;) {
        start_cv_.wait(lock, [&] { return stop_ || (generation_ != seen && job_ && next_ < n_); });
        if (stop_) return;
        seen = generation_;
        while (job_ && next_ < n_) {
            const std::size_t i = next_++;
            const auto* fn = job_;
            lock.unlock();
            try {
                (*fn)(i);
            } catch (...) {
                std::lock_guard g(mu_);
                if (!error_) error_ = std::current_exception();
            }
            lock.lock();
            if (++finished_ == n_) done_cv_.notify_all();
        }
    }
}

} // namespace rfmesh::mesh
