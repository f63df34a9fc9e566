#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace laykit {

// SplitMix64 (Steele, Lea & Flood 2014). Every randomized operation in the
// toolkit draws from this generator so that outputs are identical across
// platforms and standard-library versions. std::mt19937 plus
// std::uniform_*_distribution would not give that guarantee.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound). Plain modulo reduction: the bias is negligible at
  // corpus scale and the draw sequence stays trivial to re-implement.
  std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

  // Uniform double in [0, 1) using the top 53 bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// In-place Fisher-Yates: i runs from n-1 down to 1, swapping element i with
// element next_below(i+1). One next() call per step, none for n < 2.
template <typename T>
void fisher_yates_shuffle(std::vector<T>& values, SplitMix64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace laykit
