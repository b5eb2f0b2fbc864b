#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

#include "dagq/dag.hpp"
#include "dagq/isomorphism.hpp"
#include "dagq/rng.hpp"

namespace dagq {

using BigInt = boost::multiprecision::cpp_int;

// Number of distinct terminal states for a target size n over b node types,
// counted as (type, mask) construction sequences: b^n * prod_{k=1}^{n-1} (2^k - 1).
inline BigInt count_terminal(int n, int b) {
  if (n < 1) throw std::invalid_argument("count_terminal: n must be >= 1");
  if (b < 1) throw std::invalid_argument("count_terminal: b must be >= 1");
  BigInt total = boost::multiprecision::pow(BigInt(b), static_cast<unsigned>(n));
  for (int k = 1; k <= n - 1; ++k)
    total *= (BigInt(1) << static_cast<unsigned>(k)) - 1;
  return total;
}

inline constexpr std::uint64_t kDefaultEnumerationCap = 100'000'000;

// Visits every distinct terminal DAG of size n over b types exactly once, in
// lexicographic (type, mask) order, and returns the visit count. Refuses to
// start if the closed-form count exceeds the cap.
template <typename Visitor>
std::uint64_t enumerate_terminal(int n, int b, Visitor&& visit,
                                 std::uint64_t cap = kDefaultEnumerationCap) {
  const BigInt total = count_terminal(n, b);
  if (total > cap)
    throw std::runtime_error("enumerate_terminal(" + std::to_string(n) + ", " +
                             std::to_string(b) + "): " + total.str() +
                             " terminal states exceeds cap " + std::to_string(cap));
  std::uint64_t visited = 0;
  auto recurse = [&](auto&& self, const Dag& g) -> void {
    if (g.size() == n) {
      ++visited;
      visit(static_cast<const Dag&>(g));
      return;
    }
    const int k = g.size();
    for (int t = 0; t < b; ++t) {
      if (k == 0) {
        self(self, g.with_node(t));
      } else {
        const std::uint64_t top = std::uint64_t{1} << k;
        for (std::uint64_t mask = 1; mask < top; ++mask)
          self(self, g.with_node_and_edges(t, mask));
      }
    }
  };
  recurse(recurse, empty_dag(b));
  return visited;
}

// Exact number of terminal states isomorphic to the target, by enumeration.
inline std::uint64_t count_isomorphic_to(const Dag& target,
                                         std::uint64_t cap = kDefaultEnumerationCap) {
  std::uint64_t hits = 0;
  enumerate_terminal(
      target.size(), target.num_types(),
      [&](const Dag& g) {
        if (is_isomorphic(g, target)) ++hits;
      },
      cap);
  return hits;
}

// A terminal DAG drawn uniformly over construction sequences: uniform type and
// uniform mask at every step. Deterministic given the Rng state.
inline Dag random_target(int n, int b, Rng& rng) {
  if (n < 1 || n > kMaxNodes)
    throw std::invalid_argument("random_target: n out of range");
  Dag g = empty_dag(b);
  g = g.with_node(static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(b))));
  for (int k = 1; k < n; ++k) {
    const int t = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(b)));
    const std::uint64_t mask =
        1 + rng.uniform_below((std::uint64_t{1} << k) - 1);  // uniform in [1, 2^k - 1]
    g = g.with_node_and_edges(t, mask);
  }
  return g;
}

}  // namespace dagq
