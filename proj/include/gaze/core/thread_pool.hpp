#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace gaze {

// Fixed worker pool over a bounded FIFO queue. submit() blocks while the
// queue is full.
class ThreadPool {
 public:
  explicit ThreadPool(std::size_t workers, std::size_t queue_capacity = 256);
  ~ThreadPool();
  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  void submit(std::function<void()> task);
  void wait_idle();
  std::size_t workers() const { return threads_.size(); }

 private:
  void run();

  std::vector<std::jthread> threads_;
  std::queue<std::function<void()>> queue_;
  std::size_t capacity_;
  std::size_t active_ = 0;
  bool stopping_ = false;
  std::mutex mu_;
  std::condition_variable has_work_;
  std::condition_variable has_room_;
  std::condition_variable idle_;
};

/// Runs fn(i) for i in [0, n) on `workers` threads; results keep index order.
/// The first exception thrown by any task is rethrown after all tasks finish.
template <typename Fn>
auto parallel_map(std::size_t n, std::size_t workers, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> results(n);
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) results[i] = fn(i);
    return results;
  }
  std::exception_ptr first_error;
  std::mutex err_mu;
  {
    ThreadPool pool(workers);
    for (std::size_t i = 0; i < n; ++i) {
      pool.submit([&, i] {
        try {
          results[i] = fn(i);
        } catch (...) {
          std::lock_guard lock(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
    pool.wait_idle();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  parallel_map(n, workers, [&](std::size_t i) {
    fn(i);
    return 0;
  });
}

}  // namespace gaze
