#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace tiltpump {

/// Worker count used by the data-parallel loops. 0 = hardware concurrency.
/// Overridable via set_thread_count (CLI --threads) or TILTPUMP_THREADS.
inline int& thread_count_ref() {
  static int n = [] {
    if (const char* env = std::getenv("TILTPUMP_THREADS")) {
      int v = std::atoi(env);
      if (v > 0) return v;
    }
    return 0;
  }();
  return n;
}

inline void set_thread_count(int n) { thread_count_ref() = n; }

inline int effective_thread_count() {
  int n = thread_count_ref();
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return n > 0 ? n : 1;
}

/// Index-parallel loop with deterministic output: the body writes to
/// per-index slots, so results do not depend on scheduling.
template <class Fn>
void parallel_for(size_t n, Fn&& fn) {
  const int workers = effective_thread_count();
  if (workers <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::atomic_flag error_set = ATOMIC_FLAG_INIT;
  auto work = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        if (!error_set.test_and_set()) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace tiltpump
