// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ADVSUM_RNG_HPP_
#define ADVSUM_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace advsum {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Reproducible random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard; every conversion below is defined
/// here rather than delegated to the library's distributions, whose
/// algorithms are implementation-specific.
///
///   uniform()        (next() >> 11) * 2^-53, in [0, 1)
///   uniform(lo, hi)  lo + (hi - lo) * uniform()
///   index(n)         floor(uniform() * n), in [0, n)
///   int_in(lo, hi)   lo + index(hi - lo + 1), inclusive
///   shuffle          Fisher-Yates, i = n-1 .. 1, swap(i, index(i + 1))
///   categorical(p)   u = uniform() * sum(p); first i with cumsum(p)[i] > u
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi);
  std::size_t index(std::size_t n);
  int int_in(int lo, int hi);
  std::size_t categorical(std::span<const double> probs);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i-- > 1;) std::swap(v[i], v[index(i + 1)]);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace advsum

#endif  // ADVSUM_RNG_HPP_
