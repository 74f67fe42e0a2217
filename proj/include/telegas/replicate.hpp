#pragma once

// Replica fan-out. Replica i always draws from RngStream(seed, stream_base + i)
// and lands in slot i, so the result vector does not depend on the number of
// workers.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

#include "telegas/sim.hpp"

namespace telegas {

template <class Fn>
auto run_replicas(std::size_t replicas, unsigned workers, std::uint64_t seed,
                  std::uint64_t stream_base, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, sim::RngStream&, std::size_t>> {
  using Result = std::invoke_result_t<Fn&, sim::RngStream&, std::size_t>;
  std::vector<Result> results(replicas);
  workers = std::max(1u, std::min<unsigned>(workers, replicas == 0 ? 1 : replicas));

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      sim::RngStream rng(seed, stream_base + i);
      results[i] = fn(rng, i);
    }
  };

  if (workers == 1) {
    work(0, replicas);
    return results;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  const std::size_t chunk = (replicas + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(replicas, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      try {
        work(begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace telegas
