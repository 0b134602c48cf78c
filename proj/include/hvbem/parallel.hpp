/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hvbem {

/// Default worker count: HVBEM_WORKERS if set, else hardware concurrency.
int default_workers();

/// Runs body(i) for i in [0, count) on `workers` threads. Items are handed out
/// in chunks of `grain`; the first exception thrown by any worker is rethrown
/// on the caller after all workers joined.
template <class Body>
void parallel_for(std::size_t count, int workers, Body&& body, std::size_t grain = 1) {
  if (count == 0) return;
  if (grain == 0) grain = 1;
  std::size_t nthreads = workers < 1 ? 1 : static_cast<std::size_t>(workers);
  std::size_t chunks = (count + grain - 1) / grain;
  if (nthreads > chunks) nthreads = chunks;
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    try {
      for (;;) {
        std::size_t begin = next.fetch_add(grain);
        if (begin >= count) break;
        std::size_t end = begin + grain < count ? begin + grain : count;
        for (std::size_t i = begin; i < end; ++i) body(i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(count);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads - 1);
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace hvbem
