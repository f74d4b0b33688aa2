#include "nnlr/parallel.hpp"

#include <cstdlib>
#include <string>

namespace nnlr {

int worker_count() {
  if (const char* env = std::getenv("NNLR_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
      // fall through to the hardware default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::mt19937_64 sample_engine(std::uint64_t seed, std::uint64_t counter) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace nnlr
