#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

// Deterministic data-parallel batches: jobs are pure functions of their index
// that write only to pre-assigned result slots, so scheduling order cannot
// change any output. Reductions over job results must be done serially by the
// caller, in index order.

namespace netfuse {

class WorkerPool {
 public:
  explicit WorkerPool(int workers = 0) {
    if (workers <= 0) {
      const unsigned hc = std::thread::hardware_concurrency();
      workers = hc > 0 ? static_cast<int>(hc) : 1;
    }
    workers_ = workers;
  }

  int workers() const { return workers_; }

  void run(std::size_t n_jobs, const std::function<void(std::size_t)>& job) const {
    if (n_jobs == 0) return;
    const std::size_t threads = std::min<std::size_t>(workers_, n_jobs);
    if (threads <= 1) {
      for (std::size_t k = 0; k < n_jobs; ++k) job(k);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
      for (;;) {
        const std::size_t k = next.fetch_add(1);
        if (k >= n_jobs || failed.load()) return;
        try {
          job(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    };
    std::vector<std::thread> crew;
    crew.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) crew.emplace_back(worker);
    for (auto& th : crew) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

 private:
  int workers_ = 1;
};

}  // namespace netfuse
