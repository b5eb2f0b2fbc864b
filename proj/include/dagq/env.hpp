#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dagq/dag.hpp"
#include "dagq/enumerate.hpp"
#include "dagq/isomorphism.hpp"

namespace dagq {

// Edge-set mode: one action appends a node plus its whole incoming-edge set.
// Single mode: one action adds either a bare node or one edge into the newest
// node (the comparison variant).
enum class ActionMode { kEdgeSet, kSingle };

inline const char* to_string(ActionMode mode) {
  return mode == ActionMode::kEdgeSet ? "edge-set" : "single";
}

struct Action {
  enum class Kind { kAddNodeWithEdges, kAddNode, kAddEdge };

  Kind kind = Kind::kAddNodeWithEdges;
  int type = -1;               // node type for the add-node kinds
  bool has_mask = false;       // mask absent on the very first node
  std::uint64_t mask = 0;      // incoming-edge set for kAddNodeWithEdges
  int source = -1;             // edge source for kAddEdge (target is the newest node)

  static Action add_node_with_edges(int type) {
    return Action{Kind::kAddNodeWithEdges, type, false, 0, -1};
  }
  static Action add_node_with_edges(int type, std::uint64_t mask) {
    return Action{Kind::kAddNodeWithEdges, type, true, mask, -1};
  }
  static Action add_node(int type) { return Action{Kind::kAddNode, type, false, 0, -1}; }
  static Action add_edge(int source) { return Action{Kind::kAddEdge, -1, false, 0, source}; }

  bool operator==(const Action&) const = default;
};

inline std::string to_string(const Action& a) {
  switch (a.kind) {
    case Action::Kind::kAddNodeWithEdges:
      return a.has_mask ? "add-node(type " + std::to_string(a.type) + ", mask " +
                              std::to_string(a.mask) + ")"
                        : "add-node(type " + std::to_string(a.type) + ")";
    case Action::Kind::kAddNode:
      return "add-node(type " + std::to_string(a.type) + ")";
    case Action::Kind::kAddEdge:
      return "add-edge(from " + std::to_string(a.source) + ")";
  }
  return "?";
}

struct StepOutcome {
  Dag next_state;
  double reward = 0.0;
  bool terminal = false;
};

struct EnvConfig {
  Dag target;
  ActionMode mode = ActionMode::kEdgeSet;
  double success_reward = 1.0;
  // Optional terminal-reward override; receives (final graph, target). The
  // default is the sparse isomorphism reward.
  std::function<double(const Dag&, const Dag&)> terminal_reward;
};

// Episodic DAG-construction environment. Stateless: configuration is fixed at
// construction and step/legal_actions are pure functions of their arguments,
// so one Env can serve any number of concurrent episodes.
class Env {
 public:
  explicit Env(EnvConfig config) : cfg_(std::move(config)) {
    if (cfg_.target.size() < 1)
      throw std::invalid_argument("Env: target must have at least one node");
    if (has_floating_node(cfg_.target))
      throw std::invalid_argument("Env: target has a floating node");
  }

  const Dag& target() const noexcept { return cfg_.target; }
  int num_types() const noexcept { return cfg_.target.num_types(); }
  ActionMode mode() const noexcept { return cfg_.mode; }
  double success_reward() const noexcept { return cfg_.success_reward; }

  Dag reset() const { return empty_dag(num_types()); }

  bool is_terminal(const Dag& state) const {
    if (state.size() != cfg_.target.size()) return false;
    if (cfg_.mode == ActionMode::kSingle)
      return state.in_degree(state.size()) >= 1;
    return true;
  }

  // Deterministic ordering: types ascending with masks ascending inside each
  // type (edge-set mode); add-node types ascending then add-edge sources
  // ascending (single mode).
  std::vector<Action> legal_actions(const Dag& state) const {
    if (is_terminal(state))
      throw std::logic_error("legal_actions: state is terminal");
    const int b = num_types();
    const int k = state.size();
    std::vector<Action> actions;
    if (cfg_.mode == ActionMode::kEdgeSet) {
      if (k == 0) {
        for (int t = 0; t < b; ++t) actions.push_back(Action::add_node_with_edges(t));
        return actions;
      }
      if (k > 20)
        throw std::logic_error("legal_actions: 2^" + std::to_string(k) +
                               " masks is too many to enumerate");
      const std::uint64_t top = std::uint64_t{1} << k;
      actions.reserve(static_cast<std::size_t>(b) * (top - 1));
      for (int t = 0; t < b; ++t)
        for (std::uint64_t mask = 1; mask < top; ++mask)
          actions.push_back(Action::add_node_with_edges(t, mask));
      return actions;
    }
    // Single mode. A bare node may be added only when the newest node is not
    // floating (node 1 is exempt) and the graph is still below target size.
    const bool newest_connected = k == 0 || k == 1 || state.in_degree(k) >= 1;
    if (k < cfg_.target.size() && newest_connected)
      for (int t = 0; t < b; ++t) actions.push_back(Action::add_node(t));
    for (int src = 1; src < k; ++src)
      if (!state.has_edge(src, k)) actions.push_back(Action::add_edge(src));
    return actions;
  }

  // Transition only; validates legality with an error naming the violated rule.
  Dag apply(const Dag& state, const Action& action) const {
    if (is_terminal(state)) throw std::logic_error("apply: state is terminal");
    if (cfg_.mode == ActionMode::kEdgeSet) {
      if (action.kind != Action::Kind::kAddNodeWithEdges)
        throw std::invalid_argument("apply: " + to_string(action) +
                                    " is not an edge-set-mode action");
      check_type(action.type);
      if (state.size() == 0) {
        if (action.has_mask)
          throw std::invalid_argument("apply: first node takes no edge mask");
        return state.with_node(action.type);
      }
      if (!action.has_mask)
        throw std::invalid_argument("apply: edge mask required once nodes exist");
      return state.with_node_and_edges(action.type, action.mask);
    }
    switch (action.kind) {
      case Action::Kind::kAddNode: {
        check_type(action.type);
        const int k = state.size();
        if (k >= cfg_.target.size())
          throw std::invalid_argument("apply: graph already has target size");
        if (k >= 2 && state.in_degree(k) == 0)
          throw std::invalid_argument(
              "apply: add-node is illegal while the newest node has no incoming edge");
        return state.with_node(action.type);
      }
      case Action::Kind::kAddEdge: {
        const int newest = state.size();
        if (newest < 2)
          throw std::invalid_argument("apply: no possible edge source yet");
        if (action.source < 1 || action.source >= newest)
          throw std::invalid_argument("apply: edge source " +
                                      std::to_string(action.source) +
                                      " is not an earlier node");
        if (state.has_edge(action.source, newest))
          throw std::invalid_argument("apply: edge " + std::to_string(action.source) +
                                      "->" + std::to_string(newest) + " already exists");
        return state.with_edge(action.source, newest);
      }
      case Action::Kind::kAddNodeWithEdges:
        throw std::invalid_argument("apply: " + to_string(action) +
                                    " is not a single-mode action");
    }
    throw std::invalid_argument("apply: unknown action kind");
  }

  StepOutcome step(const Dag& state, const Action& action) const {
    Dag next = apply(state, action);
    const bool terminal = is_terminal(next);
    double reward = 0.0;
    if (terminal) {
      if (cfg_.terminal_reward) {
        reward = cfg_.terminal_reward(next, cfg_.target);
      } else if (is_isomorphic(next, cfg_.target)) {
        reward = cfg_.success_reward;
      }
    }
    return StepOutcome{std::move(next), reward, terminal};
  }

 private:
  void check_type(int type) const {
    if (type < 0 || type >= num_types())
      throw std::invalid_argument("apply: node type " + std::to_string(type) +
                                  " out of range [0, " + std::to_string(num_types()) +
                                  ")");
  }

  EnvConfig cfg_;
};

// Analytic success probability of the uniform-random policy: every (type,
// mask) construction sequence is equiprobable in edge-set mode, so the
// probability is |isomorphism class of target| / |terminal states|.
inline double random_policy_success_probability(
    const Env& env, std::uint64_t cap = kDefaultEnumerationCap) {
  if (env.mode() != ActionMode::kEdgeSet)
    throw std::logic_error(
        "random_policy_success_probability: defined for edge-set mode only");
  const double hits = static_cast<double>(count_isomorphic_to(env.target(), cap));
  const BigInt total = count_terminal(env.target().size(), env.target().num_types());
  return hits / total.convert_to<double>();
}

}  // namespace dagq
