// Copyright 2026 The polariton-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Index-parallel map used by the sweep pipelines. Results are written by
// index, so the output does not depend on the number of workers.

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace polsim {

/// Evaluates fn(i) for i in [0, count) on up to `workers` threads and returns
/// the results in index order. The first exception thrown (lowest index) is
/// rethrown after all workers have stopped.
template <typename Fn>
auto parallel_map(size_t count, int workers, Fn&& fn) -> std::vector<decltype(fn(size_t{}))> {
  using T = decltype(fn(size_t{}));
  std::vector<T> out(count);
  const size_t n_threads = std::min<size_t>(std::max(1, workers), count);
  if (n_threads <= 1) {
    for (size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  size_t error_index = count;
  std::exception_ptr error;
  auto worker = [&] {
    while (!failed.load()) {
      const size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace polsim
