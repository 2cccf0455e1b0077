#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace qmrisim {

/// Splits [0, count) into contiguous ranges and runs body(begin, end) on up to
/// `workers` threads. The first exception thrown by any range is rethrown.
template <typename Body>
void parallelFor(std::int64_t count, int workers, Body&& body) {
  workers = int(std::clamp<std::int64_t>(workers, 1, std::max<std::int64_t>(count, 1)));
  if (workers == 1) {
    body(std::int64_t(0), count);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::int64_t step = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t begin = std::min(count, w * step);
    const std::int64_t end = std::min(count, begin + step);
    threads.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace qmrisim
