// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace vaxstance {

/// Engine used for every seeded draw. The engine's output sequence is fixed by
/// the standard, unlike std::uniform_int_distribution, so the helpers below
/// give the same draws on every standard library.
using Rng = std::mt19937_64;

/// Uniform integer in [0, n) by rejection sampling; n must be > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = Rng::max() - (Rng::max() % n + 1) % n;
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x > limit);
  return x % n;
}

/// Moves a uniform random sample of min(k, size) elements to the front of
/// `items` (partial Fisher-Yates) and truncates to that prefix.
template <typename T>
void sample_prefix(std::vector<T>& items, std::size_t k, Rng& rng) {
  const std::size_t take = k < items.size() ? k : items.size();
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_below(rng, items.size() - i));
    std::swap(items[i], items[j]);
  }
  items.resize(take);
}

}  // namespace vaxstance
