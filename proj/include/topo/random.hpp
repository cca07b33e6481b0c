#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace topo {

// The standard distributions are implementation-defined, so sampling is done
// directly on mt19937_64 output to keep seeded results identical across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n > 0.
  std::size_t index(std::size_t n);

  /// Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent stream seed from (master, stream) with splitmix64.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace topo
