#ifndef RELCNN_RANDOM_H_
#define RELCNN_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace relcnn {

// The standard distributions are implementation-defined, so every sampling
// path goes through these helpers to keep runs bit-for-bit reproducible.
using Rng = std::mt19937_64;

// Mixes a base seed with a stream index (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Uniform in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

double uniform(Rng& rng, double lo, double hi);

// Unbiased integer in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);

template <class T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace relcnn

#endif  // RELCNN_RANDOM_H_
