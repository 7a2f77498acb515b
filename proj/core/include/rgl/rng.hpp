#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace rgl {

// All randomness in the library flows through explicitly seeded engines; no
// global state. Retries and pipeline stages derive fresh streams from the
// user seed with `derive_seed`, so a run is reproducible from (seed) alone.

using Rng = std::mt19937_64;

// Stable seed derivation (splitmix64 finalizer over seed and stream tags).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag_a,
                                 std::uint64_t tag_b = 0) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag_a + 1) +
                    0xbf58476d1ce4e5b9ULL * (tag_b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// k distinct values from [0, n), ascending. Floyd's sampling; O(k) draws.
inline std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
  std::vector<int> out;
  if (k <= 0 || n <= 0) return out;
  if (k >= n) {
    out.resize(n);
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  std::vector<bool> seen(n, false);
  out.reserve(k);
  for (int j = n - k; j < n; ++j) {
    int t = std::uniform_int_distribution<int>(0, j)(rng);
    if (seen[t]) t = j;
    seen[t] = true;
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rgl
