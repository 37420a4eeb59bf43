#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "dyve/errors.hpp"

namespace dyve {

// Runs fn(i) for i in [0, count) across `workers` threads. Work is handed out
// by an atomic counter, results and errors are keyed by index, so the outcome
// is independent of scheduling. The lowest-index exception is rethrown after
// every worker has drained. workers <= 1 runs inline.
template <typename Fn>
void parallel_for(size_t count, int workers, Fn&& fn) {
  if (count == 0) return;
  if (workers <= 1 || count == 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::vector<std::exception_ptr> errors(count);
  std::atomic<size_t> next{0};
  auto body = [&] {
    for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const size_t thread_count =
      std::min(static_cast<size_t>(workers), count);
  std::vector<std::thread> threads;
  threads.reserve(thread_count);
  for (size_t t = 0; t < thread_count; ++t) threads.emplace_back(body);
  for (std::thread& thread : threads) thread.join();

  for (const std::exception_ptr& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

// parallel_for wrapper that collects fn(item[i], i) into an output vector in
// input order.
template <typename T, typename Fn>
auto parallel_map(const std::vector<T>& items, int workers, Fn&& fn) {
  using Result = decltype(fn(items.front(), size_t{0}));
  std::vector<std::optional<Result>> slots(items.size());
  parallel_for(items.size(), workers,
               [&](size_t i) { slots[i].emplace(fn(items[i], i)); });
  std::vector<Result> results;
  results.reserve(items.size());
  for (auto& slot : slots) results.push_back(std::move(*slot));
  return results;
}

}  // namespace dyve
