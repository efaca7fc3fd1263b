#ifndef NLLAB_PARALLEL_HPP
#define NLLAB_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace nllab {

/// Thread cap, settable programmatically or via LAB_THREADS. Each index of a
/// parallel map writes only its own slot, so results do not depend on the
/// thread count.
inline int& thread_cap() {
  static int cap = [] {
    if (const char* env = std::getenv("LAB_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) return v;
    }
    return 1;
  }();
  return cap;
}

inline void set_threads(int n) { thread_cap() = n >= 1 ? n : 1; }

inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  std::size_t t = static_cast<std::size_t>(thread_cap());
  t = std::min<std::size_t>(t, std::max<std::size_t>(n, 1));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(t);
  for (std::size_t w = 0; w < t; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += t) fn(i);
    });
  }
  for (auto& th : workers) th.join();
}

}  // namespace nllab

#endif  // NLLAB_PARALLEL_HPP
