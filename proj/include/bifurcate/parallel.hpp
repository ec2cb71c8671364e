#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

namespace bifurcate {

// Runs fn(i) for i in [0, count) across `threads` workers. Work items are
// independent and land in caller-owned slots, so the thread count never
// affects results, only wall time.
template <class Fn>
void parallel_for(std::uint64_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count < 2) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const auto workers = static_cast<unsigned>(
      std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), count));
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::uint64_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed.load() && error) std::rethrow_exception(error);
}

// Resolves an effective thread count: explicit value, else the
// BIFURCATE_THREADS environment variable, else the hardware count.
int resolve_threads(int requested);

}  // namespace bifurcate
