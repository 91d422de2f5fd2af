// Copyright 2026 The advsum Authors.
// SPDX-License-Identifier: Apache-2.0

#include "advsum/rng.hpp"

#include <algorithm>
#include <stdexcept>

#include "advsum/tensor.hpp"

namespace advsum {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw ContractError("Rng::index: empty range");
  return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
}

int Rng::int_in(int lo, int hi) {
  if (hi < lo) throw ContractError("Rng::int_in: empty range");
  return lo + static_cast<int>(index(static_cast<std::size_t>(hi - lo) + 1));
}

std::size_t Rng::categorical(std::span<const double> probs) {
  double total = 0.0;
  for (double p : probs) total += p;
  if (!(total > 0)) throw ContractError("Rng::categorical: no probability mass");
  const double u = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0) last_positive = i;
    acc += probs[i];
    if (acc > u) return i;
  }
  return last_positive;
}

}  // namespace advsum
