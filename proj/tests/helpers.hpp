#pragma once

// Test-only oracles, kept independent of the library code paths they check.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "dagq/dag.hpp"
#include "dagq/rng.hpp"

namespace dagq::test {

// Exhaustive isomorphism check: tries every permutation of b's nodes.
inline bool brute_force_isomorphic(const Dag& a, const Dag& b) {
  if (a.size() != b.size()) return false;
  const int n = a.size();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 1);
  do {
    bool match = true;
    for (int u = 1; u <= n && match; ++u) {
      if (a.type_of(u) != b.type_of(perm[u - 1])) match = false;
      for (int v = 1; v <= n && match; ++v)
        if (u != v && a.has_edge(u, v) != b.has_edge(perm[u - 1], perm[v - 1]))
          match = false;
    }
    if (match) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return a.size() == 0;
}

// Pearson chi-square statistic for observed counts against uniform expectation.
inline double chi_square_uniform(const std::vector<std::uint64_t>& counts,
                                 std::uint64_t total_draws) {
  const double expected = static_cast<double>(total_draws) / counts.size();
  double stat = 0.0;
  for (std::uint64_t c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

// A uniformly drawn terminal DAG, mirroring the construction process.
inline Dag random_terminal(int n, int b, Rng& rng) {
  Dag g = empty_dag(b);
  for (int k = 0; k < n; ++k) {
    const int t = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(b)));
    if (k == 0) g = add_node(g, t);
    else g = add_node(g, t, 1 + rng.uniform_below((std::uint64_t{1} << k) - 1));
  }
  return g;
}

}  // namespace dagq::test
