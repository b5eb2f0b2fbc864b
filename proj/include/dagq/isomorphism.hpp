#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "dagq/dag.hpp"

namespace dagq {

namespace detail {

// (type, in-degree, out-degree) per node; sorted copies serve as a cheap
// isomorphism invariant.
inline std::vector<std::tuple<int, int, int>> node_signatures(const Dag& g) {
  std::vector<std::tuple<int, int, int>> sig;
  sig.reserve(static_cast<std::size_t>(g.size()));
  for (int v = 1; v <= g.size(); ++v)
    sig.emplace_back(g.type_of(v), g.in_degree(v), g.out_degree(v));
  return sig;
}

}  // namespace detail

// Typed isomorphism: a node bijection preserving both node types and directed
// edges. Backtracking permutation search with type and degree pruning;
// intended for the small graphs this library works with (n <= kMaxNodes,
// practical at n <= 10).
inline bool is_isomorphic(const Dag& a, const Dag& b) {
  const int n = a.size();
  if (n != b.size()) return false;
  if (a.edge_count() != b.edge_count()) return false;
  auto sig_a = detail::node_signatures(a);
  auto sig_b = detail::node_signatures(b);
  {
    auto sorted_a = sig_a;
    auto sorted_b = sig_b;
    std::sort(sorted_a.begin(), sorted_a.end());
    std::sort(sorted_b.begin(), sorted_b.end());
    if (sorted_a != sorted_b) return false;
  }
  if (n == 0) return true;

  // map[u-1] = image of a's node u in b, or 0 while unassigned.
  std::vector<int> map(static_cast<std::size_t>(n), 0);
  std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);

  auto extend = [&](auto&& self, int u) -> bool {
    if (u > n) return true;
    for (int v = 1; v <= n; ++v) {
      if (used[v] || sig_a[u - 1] != sig_b[v - 1]) continue;
      bool consistent = true;
      for (int w = 1; w < u; ++w) {
        if (a.has_edge(w, u) != b.has_edge(map[w - 1], v) ||
            a.has_edge(u, w) != b.has_edge(v, map[w - 1])) {
          consistent = false;
          break;
        }
      }
      if (!consistent) continue;
      map[u - 1] = v;
      used[v] = true;
      if (self(self, u + 1)) return true;
      map[u - 1] = 0;
      used[v] = false;
    }
    return false;
  };
  return extend(extend, 1);
}

// Canonical byte string: equal keys iff the graphs are isomorphic. The key is
// the lexicographic minimum, over all type-preserving relabelings, of
//   [n, sorted types, adjacency bit stream]
// where the bit stream lists, for each new label p and each q < p, the pair
// (edge q->p?, edge p->q?). Branch-and-bound over the relabeling prefix.
inline std::string canonical_key(const Dag& g) {
  const int n = g.size();
  std::string key;
  key.push_back(static_cast<char>(n));
  if (n == 0) return key;

  // New labels must list nodes in ascending type order, so the type block of
  // the key is fixed; only the bit stream is minimized.
  std::vector<int> sorted_types;
  sorted_types.reserve(static_cast<std::size_t>(n));
  for (int v = 1; v <= n; ++v) sorted_types.push_back(g.type_of(v));
  std::sort(sorted_types.begin(), sorted_types.end());
  for (int t : sorted_types) key.push_back(static_cast<char>(t));

  const std::size_t stream_len = static_cast<std::size_t>(n) * (n - 1);
  // 2 compares greater than any bit, so the first completed branch always
  // claims the stream. Whenever a branch improves on best at some position,
  // best is rewritten in place and its tail reset to 2; every comparison
  // therefore runs against the least stream seen so far, and branches that
  // exceed it anywhere are pruned.
  std::vector<std::uint8_t> best(stream_len, 2);
  std::vector<int> perm(static_cast<std::size_t>(n), 0);  // perm[p] = node with new label p
  std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);

  auto search = [&](auto&& self, int p, std::size_t offset) -> void {
    if (p == n) return;
    for (int v = 1; v <= n; ++v) {
      if (used[v] || g.type_of(v) != sorted_types[p]) continue;
      // Bits contributed by placing v at label p against labels q < p.
      std::size_t off = offset;
      bool prune = false;
      for (int q = 0; q < p && !prune; ++q) {
        const std::uint8_t bits[2] = {
            static_cast<std::uint8_t>(g.has_edge(perm[q], v) ? 1 : 0),
            static_cast<std::uint8_t>(g.has_edge(v, perm[q]) ? 1 : 0)};
        for (std::uint8_t bit : bits) {
          if (bit > best[off]) {
            prune = true;
            break;
          }
          if (bit < best[off]) {
            best[off] = bit;
            std::fill(best.begin() + static_cast<std::ptrdiff_t>(off) + 1, best.end(),
                      static_cast<std::uint8_t>(2));
          }
          ++off;
        }
      }
      if (prune) continue;
      used[v] = true;
      perm[p] = v;
      self(self, p + 1, off);
      used[v] = false;
    }
  };
  search(search, 0, 0);

  key.reserve(key.size() + stream_len);
  for (std::uint8_t bit : best) key.push_back(static_cast<char>(bit));
  return key;
}

}  // namespace dagq
