#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "dagq/dag.hpp"
#include "dagq/rng.hpp"

using namespace dagq;

TEST_CASE("empty_dag is the null graph") {
  const Dag g = empty_dag(3);
  CHECK(g.size() == 0);
  CHECK(g.num_types() == 3);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("decode_mask follows the leftmost-digit-is-node-1 convention") {
  // 6 = 110 over three existing nodes: sources are nodes 1 and 2.
  CHECK(decode_mask(6, 3) == std::vector<int>{1, 2});
  // 1 = 001: only the newest existing node (node 3).
  CHECK(decode_mask(1, 3) == std::vector<int>{3});
  // 7 = 111: all previous nodes.
  CHECK(decode_mask(7, 3) == std::vector<int>{1, 2, 3});
  CHECK(decode_mask(1, 1) == std::vector<int>{1});
}

TEST_CASE("decode_mask rejects out-of-range masks") {
  CHECK_THROWS_AS(decode_mask(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(decode_mask(8, 3), std::invalid_argument);
  CHECK_THROWS_AS(decode_mask(1, 0), std::invalid_argument);
}

TEST_CASE("encode_mask inverts decode_mask") {
  CHECK(encode_mask({1, 2}, 3) == 6);
  CHECK(encode_mask({3}, 3) == 1);
  CHECK(encode_mask({1, 2, 3}, 3) == 7);
  CHECK_THROWS_AS(encode_mask({}, 3), std::invalid_argument);
  CHECK_THROWS_AS(encode_mask({4}, 3), std::invalid_argument);
  CHECK_THROWS_AS(encode_mask({0}, 3), std::invalid_argument);
}

TEST_CASE("mask round-trip for every k in [1,12]") {
  for (int k = 1; k <= 12; ++k) {
    const std::uint64_t top = std::uint64_t{1} << k;
    for (std::uint64_t mask = 1; mask < top; ++mask) {
      CAPTURE(k, mask);
      REQUIRE(encode_mask(decode_mask(mask, k), k) == mask);
    }
  }
}

TEST_CASE("add_node: first node takes no mask") {
  const Dag g = add_node(empty_dag(1), 0);
  CHECK(g.size() == 1);
  CHECK(g.edge_count() == 0);
  CHECK(g.type_of(1) == 0);
  CHECK_THROWS_AS(add_node(empty_dag(1), 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(add_node(g, 0), std::invalid_argument);  // mask now required
}

TEST_CASE("add_node appends the worked 4th-node example") {
  // Three nodes (types 1, 2, 1 over b=3) with edges 1->2, 2->3; adding a node
  // of type 2 (the third of three types) with mask 6 = 110 must create edges
  // from nodes 1 and 2 into node 4 and nothing else.
  Dag g = add_node(empty_dag(3), 0);
  g = add_node(g, 1, encode_mask({1}, 1));
  g = add_node(g, 0, encode_mask({2}, 2));
  REQUIRE(g.edges() == std::vector<std::pair<int, int>>{{1, 2}, {2, 3}});

  const Dag extended = add_node(g, 2, 6);
  CHECK(extended.size() == 4);
  CHECK(extended.type_of(4) == 2);
  CHECK(extended.edges() ==
        std::vector<std::pair<int, int>>{{1, 2}, {1, 4}, {2, 3}, {2, 4}});
  // Value semantics: the original graph is untouched.
  CHECK(g.size() == 3);
  CHECK(g.edge_count() == 2);
}

TEST_CASE("all-ones masks build the transitive tournament") {
  Dag g = add_node(empty_dag(1), 0);
  for (int k = 1; k <= 4; ++k)
    g = add_node(g, 0, (std::uint64_t{1} << k) - 1);
  REQUIRE(g.size() == 5);
  for (int i = 1; i <= 5; ++i)
    for (int j = i + 1; j <= 5; ++j) CHECK(g.has_edge(i, j));
  CHECK(g.edge_count() == 10);
}

TEST_CASE("degrees and floating-node detection") {
  Dag g = add_node(empty_dag(2), 1);
  g = add_node(g, 0, 1);
  CHECK(g.in_degree(1) == 0);
  CHECK(g.in_degree(2) == 1);
  CHECK(g.out_degree(1) == 1);
  CHECK_FALSE(has_floating_node(g));
  const Dag floating = g.with_node(0);
  CHECK(has_floating_node(floating));
}

TEST_CASE("serialize produces the documented form") {
  CHECK(serialize(empty_dag(2)) == "dag v1; n=0; b=2; types=; edges=");
  Dag g = add_node(empty_dag(3), 0);
  g = add_node(g, 1, 1);
  g = add_node(g, 0, encode_mask({2}, 2));
  g = add_node(g, 2, 6);
  CHECK(serialize(g) ==
        "dag v1; n=4; b=3; types=0,1,0,2; edges=1->2,1->4,2->3,2->4");
}

TEST_CASE("parse round-trips serialize on random graphs") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int b = 1 + static_cast<int>(rng.uniform_below(3));
    const int n = static_cast<int>(rng.uniform_below(7));  // includes n=0
    Dag g = empty_dag(b);
    for (int k = 0; k < n; ++k) {
      const int t = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(b)));
      if (k == 0) g = add_node(g, t);
      else g = add_node(g, t, 1 + rng.uniform_below((std::uint64_t{1} << k) - 1));
    }
    CAPTURE(serialize(g));
    REQUIRE(parse_dag(serialize(g)) == g);
  }
}

TEST_CASE("parse rejects malformed text with a position") {
  const auto expect_error = [](std::string_view text) {
    try {
      parse_dag(text);
      FAIL("expected ParseError for: " << text);
    } catch (const ParseError& e) {
      CHECK(e.position() <= text.size());
    }
  };
  expect_error("dag v2; n=0; b=1; types=; edges=");
  expect_error("dag v1; n=2; b=1; types=0; edges=");          // type count mismatch
  expect_error("dag v1; n=2; b=1; types=0,1; edges=");        // type out of range
  expect_error("dag v1; n=2; b=1; types=0,0; edges=2->1");    // not topological
  expect_error("dag v1; n=2; b=1; types=0,0; edges=1->1");    // self loop
  expect_error("dag v1; n=2; b=1; types=0,0; edges=1->3");    // out of range
  expect_error("dag v1; n=2; b=1; types=0,0; edges=1->2,1->2");  // duplicate
  expect_error("dag v1; n=2; b=1; types=0,0; edges=1->2 trailing");
}

TEST_CASE("with_edge enforces insertion order") {
  Dag g = add_node(empty_dag(1), 0);
  g = g.with_node(0);
  CHECK_THROWS_AS(g.with_edge(2, 1), std::invalid_argument);
  CHECK_THROWS_AS(g.with_edge(1, 1), std::invalid_argument);
  const Dag linked = g.with_edge(1, 2);
  CHECK(linked.has_edge(1, 2));
  CHECK_THROWS_AS(linked.with_edge(1, 2), std::invalid_argument);
}
