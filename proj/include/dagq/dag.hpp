#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dagq {

// Node indices are 1-based throughout the public interface; node types are
// integers in [0, num_types).
inline constexpr int kMaxNodes = 60;

// --- Edge-mask codec ---------------------------------------------------
//
// A graph with k existing nodes admits incoming-edge sets encoded as an
// integer mask in [1, 2^k - 1]. Written as a k-digit binary string, the
// leftmost digit selects node 1 and the rightmost node k: node j is a
// source iff the bit of weight 2^(k-j) is set. The empty set (mask 0) is
// not a legal choice, so every added node has at least one incoming edge.

inline void check_mask(std::uint64_t mask, int existing_nodes) {
  if (existing_nodes < 1 || existing_nodes > kMaxNodes - 1)
    throw std::invalid_argument("edge mask: existing node count " +
                                std::to_string(existing_nodes) + " out of range");
  const std::uint64_t limit = (std::uint64_t{1} << existing_nodes);
  if (mask == 0)
    throw std::invalid_argument("edge mask: 0 is illegal (empty edge set)");
  if (mask >= limit)
    throw std::invalid_argument("edge mask: " + std::to_string(mask) +
                                " out of range [1, " + std::to_string(limit - 1) +
                                "] for " + std::to_string(existing_nodes) +
                                " existing nodes");
}

// Sources of the new node's incoming edges, ascending 1-based indices.
inline std::vector<int> decode_mask(std::uint64_t mask, int existing_nodes) {
  check_mask(mask, existing_nodes);
  std::vector<int> sources;
  for (int j = 1; j <= existing_nodes; ++j) {
    if (mask & (std::uint64_t{1} << (existing_nodes - j))) sources.push_back(j);
  }
  return sources;
}

inline std::uint64_t encode_mask(const std::vector<int>& sources, int existing_nodes) {
  if (existing_nodes < 1 || existing_nodes > kMaxNodes - 1)
    throw std::invalid_argument("encode_mask: existing node count out of range");
  if (sources.empty())
    throw std::invalid_argument("encode_mask: empty source set is illegal");
  std::uint64_t mask = 0;
  for (int j : sources) {
    if (j < 1 || j > existing_nodes)
      throw std::invalid_argument("encode_mask: source node " + std::to_string(j) +
                                  " out of range [1, " +
                                  std::to_string(existing_nodes) + "]");
    mask |= std::uint64_t{1} << (existing_nodes - j);
  }
  return mask;
}

// --- DAG ----------------------------------------------------------------
//
// Immutable-by-convention DAG built in insertion order: an edge i->j always
// has i < j, so acyclicity is structural. Nodes carry a type in
// [0, num_types). Mutators return a modified copy.
class Dag {
 public:
  explicit Dag(int num_types) : num_types_(num_types) {
    if (num_types < 1 || num_types > 255)
      throw std::invalid_argument("Dag: num_types must be in [1, 255]");
  }

  int size() const noexcept { return static_cast<int>(types_.size()); }
  int num_types() const noexcept { return num_types_; }

  int type_of(int node) const {
    check_node(node);
    return types_[node - 1];
  }

  bool has_edge(int from, int to) const {
    check_node(from);
    check_node(to);
    return (in_[to - 1] >> (from - 1)) & 1u;
  }

  // Bit (i-1) set iff edge i->node exists.
  std::uint64_t in_bits(int node) const {
    check_node(node);
    return in_[node - 1];
  }
  std::uint64_t out_bits(int node) const {
    check_node(node);
    return out_[node - 1];
  }

  int in_degree(int node) const { return std::popcount(in_bits(node)); }
  int out_degree(int node) const { return std::popcount(out_bits(node)); }

  int edge_count() const {
    int total = 0;
    for (std::uint64_t bits : in_) total += std::popcount(bits);
    return total;
  }

  // Edges sorted lexicographically by (from, to).
  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> list;
    const int n = size();
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        if (has_edge(i, j)) list.emplace_back(i, j);
    return list;
  }

  Dag with_node(int type) const {
    Dag copy = *this;
    copy.push_node(type);
    return copy;
  }

  Dag with_edge(int from, int to) const {
    Dag copy = *this;
    copy.link(from, to);
    return copy;
  }

  // Appends a node of the given type with incoming edges per the mask.
  // Requires at least one existing node.
  Dag with_node_and_edges(int type, std::uint64_t incoming_mask) const {
    const int k = size();
    check_mask(incoming_mask, k);
    Dag copy = *this;
    copy.push_node(type);
    for (int j = 1; j <= k; ++j) {
      if (incoming_mask & (std::uint64_t{1} << (k - j))) copy.link(j, k + 1);
    }
    return copy;
  }

  bool operator==(const Dag&) const = default;

 private:
  void check_node(int node) const {
    if (node < 1 || node > size())
      throw std::invalid_argument("Dag: node " + std::to_string(node) +
                                  " out of range [1, " + std::to_string(size()) + "]");
  }

  void push_node(int type) {
    if (type < 0 || type >= num_types_)
      throw std::invalid_argument("Dag: node type " + std::to_string(type) +
                                  " out of range [0, " + std::to_string(num_types_) + ")");
    if (size() >= kMaxNodes)
      throw std::invalid_argument("Dag: node capacity exceeded");
    types_.push_back(static_cast<std::uint8_t>(type));
    in_.push_back(0);
    out_.push_back(0);
  }

  void link(int from, int to) {
    check_node(from);
    check_node(to);
    if (from >= to)
      throw std::invalid_argument("Dag: edge " + std::to_string(from) + "->" +
                                  std::to_string(to) +
                                  " violates insertion order (need from < to)");
    const std::uint64_t bit_from = std::uint64_t{1} << (from - 1);
    const std::uint64_t bit_to = std::uint64_t{1} << (to - 1);
    if (in_[to - 1] & bit_from)
      throw std::invalid_argument("Dag: edge " + std::to_string(from) + "->" +
                                  std::to_string(to) + " already exists");
    in_[to - 1] |= bit_from;
    out_[from - 1] |= bit_to;
  }

  int num_types_;
  std::vector<std::uint8_t> types_;
  std::vector<std::uint64_t> in_;   // in_[j-1] bit (i-1): edge i->j
  std::vector<std::uint64_t> out_;  // out_[i-1] bit (j-1): edge i->j
};

inline Dag empty_dag(int num_types) { return Dag(num_types); }

// The environment's node-addition primitive: the first node takes no mask,
// every later node takes a mandatory non-empty incoming-edge mask.
inline Dag add_node(const Dag& dag, int type,
                    std::optional<std::uint64_t> mask = std::nullopt) {
  if (dag.size() == 0) {
    if (mask.has_value())
      throw std::invalid_argument("add_node: first node takes no edge mask");
    return dag.with_node(type);
  }
  if (!mask.has_value())
    throw std::invalid_argument("add_node: edge mask required once nodes exist");
  return dag.with_node_and_edges(type, *mask);
}

// True if any node past the first has no incoming edge. Terminal graphs and
// every edge-set-mode state satisfy !has_floating_node; single-mode
// intermediate states may not.
inline bool has_floating_node(const Dag& dag) {
  for (int j = 2; j <= dag.size(); ++j)
    if (dag.in_degree(j) == 0) return true;
  return false;
}

// --- Text format ----------------------------------------------------------
//
//   dag v1; n=<n>; b=<b>; types=<t1,...,tn>; edges=<i->j,...>
//
// 1-based node indices, edges sorted lexicographically. Edge lists with
// i >= j are rejected (the format only carries insertion-ordered DAGs).

inline std::string serialize(const Dag& dag) {
  std::string out = "dag v1; n=" + std::to_string(dag.size()) +
                    "; b=" + std::to_string(dag.num_types()) + "; types=";
  for (int i = 1; i <= dag.size(); ++i) {
    if (i > 1) out += ',';
    out += std::to_string(dag.type_of(i));
  }
  out += "; edges=";
  bool first = true;
  for (auto [i, j] : dag.edges()) {
    if (!first) out += ',';
    first = false;
    out += std::to_string(i) + "->" + std::to_string(j);
  }
  return out;
}

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : std::runtime_error(message + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

namespace detail {

class TextCursor {
 public:
  explicit TextCursor(std::string_view text) : text_(text) {}

  std::size_t pos() const noexcept { return pos_; }
  bool at_end() const noexcept { return pos_ >= text_.size(); }

  void skip_spaces() {
    while (pos_ < text_.size() && text_[pos_] == ' ') ++pos_;
  }

  void expect(std::string_view literal) {
    if (text_.substr(pos_, literal.size()) != literal)
      throw ParseError("expected '" + std::string(literal) + "'", pos_);
    pos_ += literal.size();
  }

  bool peek(char c) const { return pos_ < text_.size() && text_[pos_] == c; }

  bool consume(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }

  std::uint64_t read_uint() {
    std::uint64_t value = 0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin)
      throw ParseError("expected an unsigned integer", pos_);
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Dag parse_dag(std::string_view text) {
  detail::TextCursor cur(text);
  cur.skip_spaces();
  cur.expect("dag");
  cur.skip_spaces();
  cur.expect("v1");
  cur.skip_spaces();
  cur.expect(";");
  cur.skip_spaces();
  cur.expect("n=");
  const std::size_t n_pos = cur.pos();
  const std::uint64_t n = cur.read_uint();
  if (n > kMaxNodes) throw ParseError("node count exceeds capacity", n_pos);
  cur.skip_spaces();
  cur.expect(";");
  cur.skip_spaces();
  cur.expect("b=");
  const std::size_t b_pos = cur.pos();
  const std::uint64_t b = cur.read_uint();
  if (b < 1 || b > 255) throw ParseError("type count must be in [1, 255]", b_pos);
  cur.skip_spaces();
  cur.expect(";");
  cur.skip_spaces();
  cur.expect("types=");

  Dag dag(static_cast<int>(b));
  for (std::uint64_t i = 0; i < n; ++i) {
    if (i > 0) {
      if (!cur.consume(',')) throw ParseError("expected ',' in type list", cur.pos());
    }
    const std::size_t t_pos = cur.pos();
    const std::uint64_t t = cur.read_uint();
    if (t >= b) throw ParseError("node type out of range", t_pos);
    dag = dag.with_node(static_cast<int>(t));
  }
  cur.skip_spaces();
  cur.expect(";");
  cur.skip_spaces();
  cur.expect("edges=");
  bool first_edge = true;
  while (true) {
    cur.skip_spaces();
    if (cur.at_end()) break;
    if (!first_edge) {
      if (!cur.consume(',')) throw ParseError("expected ',' in edge list", cur.pos());
    }
    first_edge = false;
    const std::size_t e_pos = cur.pos();
    const std::uint64_t from = cur.read_uint();
    cur.expect("->");
    const std::uint64_t to = cur.read_uint();
    if (from < 1 || from > n || to < 1 || to > n)
      throw ParseError("edge endpoint out of range", e_pos);
    if (from >= to)
      throw ParseError("edge list is not topologically ordered (need i < j)", e_pos);
    if (dag.has_edge(static_cast<int>(from), static_cast<int>(to)))
      throw ParseError("duplicate edge", e_pos);
    dag = dag.with_edge(static_cast<int>(from), static_cast<int>(to));
  }
  return dag;
}

}  // namespace dagq
