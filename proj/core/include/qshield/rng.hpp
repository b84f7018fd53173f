#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace qshield {

// Seeded generator used for every random decision in the library.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are not (their algorithms are
// implementation-defined), so the derived draws below are spelled out:
//   uniform()  = (next_u64() >> 11) * 2^-53            in [0, 1)
//   below(n)   = rejection sampling on next_u64() % n   (unbiased)
//   normal()   = Box-Muller, u1 = 1 - uniform(), u2 = uniform(), cosine branch
//   shuffle()  = Fisher-Yates from the back, j = below(i + 1)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Mixes (seed, stream) into an independent child seed (SplitMix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace qshield
