#include "core/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace smim::parallel {

namespace {

std::atomic<int> g_threads{1};

// Minimal persistent pool; workers pull chunk indices from a shared counter.
// The caller thread participates, so a pool of k-1 workers serves k threads.
class Pool {
 public:
  static Pool& instance() {
    static Pool pool;
    return pool;
  }

  void run(int extra_workers, std::size_t n_chunks,
           const std::function<void(std::size_t)>& task) {
    std::unique_lock<std::mutex> lock(run_mutex_);
    ensure_workers(extra_workers);
    task_ = &task;
    next_.store(0, std::memory_order_relaxed);
    total_ = n_chunks;
    pending_.store(static_cast<int>(threads_.size()), std::memory_order_release);
    {
      std::lock_guard<std::mutex> lk(mutex_);
      generation_++;
    }
    cv_.notify_all();
    work();
    while (pending_.load(std::memory_order_acquire) > 0) std::this_thread::yield();
    task_ = nullptr;
  }

 private:
  Pool() = default;
  ~Pool() {
    {
      std::lock_guard<std::mutex> lk(mutex_);
      stop_ = true;
      generation_++;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void ensure_workers(int n) {
    while (static_cast<int>(threads_.size()) < n) {
      threads_.emplace_back([this] { worker_loop(); });
    }
  }

  void worker_loop() {
    uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lk(mutex_);
        cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      work();
      pending_.fetch_sub(1, std::memory_order_acq_rel);
    }
  }

  void work() {
    const auto* task = task_;
    if (!task) return;
    for (;;) {
      const std::size_t i = next_.fetch_add(1, std::memory_order_relaxed);
      if (i >= total_) break;
      (*task)(i);
    }
  }

  std::mutex run_mutex_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<std::thread> threads_;
  const std::function<void(std::size_t)>* task_ = nullptr;
  std::atomic<std::size_t> next_{0};
  std::size_t total_ = 0;
  std::atomic<int> pending_{0};
  uint64_t generation_ = 0;
  bool stop_ = false;
};

}  // namespace

void set_threads(int n) { g_threads.store(n < 1 ? 1 : n); }
int threads() { return g_threads.load(); }

std::size_t num_chunks(std::size_t n, std::size_t chunk) {
  if (n == 0) return 0;
  return (n + chunk - 1) / chunk;
}

void for_chunks(std::size_t n, std::size_t chunk,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& f) {
  const std::size_t k = num_chunks(n, chunk);
  if (k == 0) return;
  const int workers = threads();
  auto task = [&](std::size_t i) {
    const std::size_t lo = i * chunk;
    const std::size_t hi = lo + chunk < n ? lo + chunk : n;
    f(i, lo, hi);
  };
  if (workers <= 1 || k == 1) {
    for (std::size_t i = 0; i < k; ++i) task(i);
    return;
  }
  std::function<void(std::size_t)> fn = task;
  Pool::instance().run(workers - 1, k, fn);
}

}  // namespace smim::parallel
