#ifndef SEEDSTABLE_PARALLEL_HPP
#define SEEDSTABLE_PARALLEL_HPP

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace seedstable {

// Default worker count: SEEDSTABLE_WORKERS, else 1.
inline int default_workers() {
  if (const char* env = std::getenv("SEEDSTABLE_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  return 1;
}

// Run fn(i) for i in [0, count) across `workers` threads. Tasks are claimed
// from a shared counter; callers must write results by index so the outcome
// is independent of scheduling.
template <typename Fn>
void parallel_for(long count, int workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  const int nthreads = static_cast<int>(std::min<long>(workers, count));
  threads.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace seedstable

#endif
