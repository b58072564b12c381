#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace gfflab::par {

int default_workers();

/// Runs body(replicate_index, chunk_accumulator) for replicates [0, n),
/// partitioned into fixed chunks that workers claim dynamically. Each chunk
/// owns an accumulator; the returned vector is in chunk order, so any
/// order-sensitive reduction downstream is independent of the worker count
/// and scheduling (bit-identical reruns).
template <class Acc, class Body>
std::vector<Acc> run_chunked(std::uint64_t n, int workers, Body&& body,
                             std::uint64_t chunk_size = 256) {
  if (workers < 1) workers = 1;
  const std::uint64_t n_chunks = (n + chunk_size - 1) / chunk_size;
  std::vector<Acc> accs(n_chunks);
  if (n == 0) return accs;

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&]() {
    while (true) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      const std::uint64_t lo = c * chunk_size;
      const std::uint64_t hi = std::min(n, lo + chunk_size);
      try {
        for (std::uint64_t r = lo; r < hi; ++r) body(r, accs[c]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return accs;
}

}  // namespace gfflab::par
