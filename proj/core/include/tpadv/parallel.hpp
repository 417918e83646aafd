#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tpadv {

/// Runs fn(i) for every i in [0, chunks) on up to `workers` threads.
///
/// Callers write results into per-chunk slots and merge them in index order,
/// which keeps every reduction independent of the worker count.
template <class Fn>
void for_each_chunk(std::size_t chunks, unsigned workers, Fn&& fn) {
  if (workers <= 1 || chunks <= 1) {
    for (std::size_t i = 0; i < chunks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> pool;
    const auto n = std::min<std::size_t>(workers, chunks);
    pool.reserve(n);
    for (std::size_t w = 0; w < n; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const auto i = next.fetch_add(1);
          if (i >= chunks) return;
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
            next.store(chunks);
            return;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

/// Number of fixed-size chunks covering `total` items.
constexpr std::size_t chunk_count(std::uint64_t total, std::uint64_t chunk) {
  return static_cast<std::size_t>((total + chunk - 1) / chunk);
}

}  // namespace tpadv
