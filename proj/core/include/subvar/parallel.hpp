#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace subvar {

// out[k] = fn(k) for k < count on up to `workers` threads. Items are claimed from a shared
// counter but each result lands in its own slot, so the output never depends on scheduling.
// The first exception (lowest index) is rethrown after all threads join.
template <class R, class F>
std::vector<R> parallel_map(int count, int workers, F&& fn) {
  std::vector<R> out(static_cast<size_t>(std::max(count, 0)));
  std::vector<std::exception_ptr> errors(out.size());
  std::atomic<int> next{0};
  auto body = [&] {
    for (int k = next++; k < count; k = next++) {
      try {
        out[static_cast<size_t>(k)] = fn(k);
      } catch (...) {
        errors[static_cast<size_t>(k)] = std::current_exception();
      }
    }
  };
  const int w = std::clamp(workers, 1, std::max(count, 1));
  if (w == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < w; ++i) pool.emplace_back(body);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace subvar
