#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <thread>
#include <vector>

namespace nnlr {

/// Worker cap: NNLR_THREADS if set and positive, otherwise hardware concurrency.
int worker_count();

/// Engine for sample `counter` of a run seeded with `seed`. Results never depend
/// on which worker draws the sample.
std::mt19937_64 sample_engine(std::uint64_t seed, std::uint64_t counter);

/// Runs fn(i) for i in [0, count) on up to `workers` threads with static chunking.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, int workers = worker_count()) {
  const std::size_t w =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(workers), count));
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    threads.emplace_back([&, t] {
      const std::size_t begin = count * t / w;
      const std::size_t end = count * (t + 1) / w;
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& th : threads) th.join();
}

struct MinResult {
  double value = std::numeric_limits<double>::infinity();
  std::size_t index = 0;
};

/// min over i of fn(i); ties resolve to the lowest index.
template <class Fn>
MinResult parallel_min(std::size_t count, Fn&& fn, int workers = worker_count()) {
  std::vector<double> values(count);
  parallel_for(count, [&](std::size_t i) { values[i] = fn(i); }, workers);
  MinResult best;
  for (std::size_t i = 0; i < count; ++i) {
    if (values[i] < best.value) best = {values[i], i};
  }
  return best;
}

}  // namespace nnlr
