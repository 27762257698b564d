#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace schottky {

namespace detail {
inline std::atomic<int>& worker_knob() {
  static std::atomic<int> workers{1};
  return workers;
}
inline bool& inside_parallel() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

/// Number of threads used by `parallel_for`. Results never depend on it.
inline int workers() { return detail::worker_knob().load(); }

inline void set_workers(int k) { detail::worker_knob().store(std::max(1, k)); }

/// Runs fn(i) for i in [0, n). Each index must write only its own output
/// slot; combination is the caller's job and happens in index order, which
/// keeps results bit-identical for any worker count. The first exception
/// thrown (lowest index wins) is rethrown on the calling thread. Nested
/// calls run serially on the worker that issued them.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const auto k = static_cast<std::size_t>(workers());
  if (k <= 1 || n <= 1 || detail::inside_parallel()) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  std::size_t err_index = n;
  auto body = [&] {
    const bool was = detail::inside_parallel();
    detail::inside_parallel() = true;
    struct Restore {
      bool v;
      ~Restore() { detail::inside_parallel() = v; }
    } restore{was};
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  std::vector<std::jthread> pool;
  const std::size_t spawn = std::min(k, n) - 1;
  pool.reserve(spawn);
  for (std::size_t t = 0; t < spawn; ++t) pool.emplace_back(body);
  body();
  pool.clear();
  if (err) std::rethrow_exception(err);
}

}  // namespace schottky
