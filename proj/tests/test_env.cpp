#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>
#include <vector>

#include "dagq/enumerate.hpp"
#include "dagq/env.hpp"
#include "dagq/isomorphism.hpp"
#include "helpers.hpp"

using namespace dagq;

namespace {

Dag path(int n, int b = 1) {
  Dag g = add_node(empty_dag(b), 0);
  for (int k = 1; k < n; ++k) g = add_node(g, 0, encode_mask({k}, k));
  return g;
}

Env make_env(const Dag& target, ActionMode mode = ActionMode::kEdgeSet) {
  return Env(EnvConfig{target, mode});
}

}  // namespace

TEST_CASE("reset returns the null graph and offers b type-only actions") {
  Rng rng(5);
  const Env env = make_env(random_target(4, 3, rng));
  const Dag start = env.reset();
  CHECK(start.size() == 0);
  CHECK_FALSE(env.is_terminal(start));
  const std::vector<Action> actions = env.legal_actions(start);
  REQUIRE(actions.size() == 3);
  for (int t = 0; t < 3; ++t) {
    CHECK(actions[static_cast<std::size_t>(t)].type == t);
    CHECK_FALSE(actions[static_cast<std::size_t>(t)].has_mask);
  }
}

TEST_CASE("edge-set action counts follow b * (2^k - 1)") {
  for (int b = 1; b <= 3; ++b) {
    Rng rng(100 + static_cast<std::uint64_t>(b));
    const Env env = make_env(random_target(8, b, rng));
    Dag state = env.reset();
    for (int k = 0; k <= 7; ++k) {
      const std::vector<Action> actions = env.legal_actions(state);
      const std::size_t expected = k == 0
          ? static_cast<std::size_t>(b)
          : static_cast<std::size_t>(b) * ((std::size_t{1} << k) - 1);
      CAPTURE(b, k);
      REQUIRE(actions.size() == expected);
      state = env.apply(state, actions[0]);
    }
  }
}

TEST_CASE("edge-set actions are ordered by type then mask") {
  Rng rng(6);
  const Env env = make_env(random_target(5, 2, rng));
  const Dag state = path(3, 2);
  const std::vector<Action> actions = env.legal_actions(state);
  REQUIRE(actions.size() == 14);  // 2 * (2^3 - 1)
  for (std::size_t i = 0; i < actions.size(); ++i) {
    CHECK(actions[i].type == static_cast<int>(i / 7));
    CHECK(actions[i].mask == static_cast<std::uint64_t>(i % 7) + 1);
  }
}

TEST_CASE("step: completing the target yields the success reward exactly once") {
  const Dag target = path(3);
  const Env env = make_env(target);
  Dag state = env.reset();
  StepOutcome out = env.step(state, Action::add_node_with_edges(0));
  CHECK(out.reward == 0.0);
  CHECK_FALSE(out.terminal);
  out = env.step(out.next_state, Action::add_node_with_edges(0, 1));
  CHECK(out.reward == 0.0);
  CHECK_FALSE(out.terminal);
  // Completing 2->3 closes the path; mask {2} over two existing nodes is 01 = 1.
  out = env.step(out.next_state, Action::add_node_with_edges(0, 1));
  CHECK(out.terminal);
  CHECK(out.reward == 1.0);
  // The non-isomorphic completions score zero.
  const Dag two = add_node(add_node(empty_dag(1), 0), 0, 1);
  for (const std::uint64_t mask : {std::uint64_t{2}, std::uint64_t{3}}) {
    const StepOutcome alt = env.step(two, Action::add_node_with_edges(0, mask));
    CHECK(alt.terminal);
    CHECK(alt.reward == 0.0);
  }
}

TEST_CASE("step validates actions with rule-specific errors") {
  Rng rng(8);
  const Env env = make_env(random_target(4, 2, rng));
  const Dag start = env.reset();
  CHECK_THROWS_AS(env.step(start, Action::add_node_with_edges(0, 1)),
                  std::invalid_argument);  // mask on the first node
  CHECK_THROWS_AS(env.step(start, Action::add_node(0)), std::invalid_argument);
  CHECK_THROWS_AS(env.step(start, Action::add_node_with_edges(5)),
                  std::invalid_argument);  // type out of range
  const Dag one = env.apply(start, Action::add_node_with_edges(0));
  CHECK_THROWS_AS(env.step(one, Action::add_node_with_edges(0)),
                  std::invalid_argument);  // mask required
  CHECK_THROWS_AS(env.step(one, Action::add_node_with_edges(0, 2)),
                  std::invalid_argument);  // mask out of range
}

TEST_CASE("legal_actions and step reject terminal states") {
  const Dag target = path(2);
  const Env env = make_env(target);
  CHECK_THROWS_AS(env.legal_actions(target), std::logic_error);
  CHECK_THROWS_AS(env.step(target, Action::add_node_with_edges(0, 1)),
                  std::logic_error);
}

TEST_CASE("reward is sparse: non-zero only at terminal states isomorphic to the target") {
  for (const auto [n, b] : {std::pair{3, 1}, {4, 2}, {5, 1}}) {
    Rng rng(31 + static_cast<std::uint64_t>(n));
    const Dag target = random_target(n, b, rng);
    const Env env = make_env(target);
    std::set<std::string> rewarded;
    // Replays every construction sequence through env.step.
    auto walk = [&](auto&& self, const Dag& state) -> void {
      for (const Action& a : env.legal_actions(state)) {
        const StepOutcome out = env.step(state, a);
        if (!out.terminal) {
          REQUIRE(out.reward == 0.0);
          self(self, out.next_state);
        } else if (out.reward != 0.0) {
          REQUIRE(out.reward == 1.0);
          rewarded.insert(serialize(out.next_state));
        }
      }
    };
    walk(walk, env.reset());
    // The rewarded set is exactly the isomorphism class of the target.
    std::set<std::string> iso_class;
    enumerate_terminal(n, b, [&](const Dag& g) {
      if (is_isomorphic(g, target)) iso_class.insert(serialize(g));
    });
    CAPTURE(n, b, serialize(target));
    REQUIRE(rewarded == iso_class);
  }
}

TEST_CASE("edge-set episodes take exactly n steps") {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const Dag target = random_target(5, 2, rng);
    const Env env = make_env(target);
    Dag state = env.reset();
    int steps = 0;
    while (!env.is_terminal(state)) {
      const std::vector<Action> actions = env.legal_actions(state);
      state = env.step(state, actions[rng.uniform_below(actions.size())]).next_state;
      ++steps;
    }
    CHECK(steps == 5);
  }
}

TEST_CASE("single mode: add-node is gated on the newest node being connected") {
  Rng rng(70);
  const Dag target = random_target(4, 1, rng);
  const Env env = make_env(target, ActionMode::kSingle);
  Dag state = env.reset();
  // Only add-node from the null graph.
  std::vector<Action> actions = env.legal_actions(state);
  REQUIRE(actions.size() == 1);
  CHECK(actions[0].kind == Action::Kind::kAddNode);
  state = env.apply(state, actions[0]);
  // One node: still only add-node (node 1 is exempt from the floating rule).
  actions = env.legal_actions(state);
  REQUIRE(actions.size() == 1);
  CHECK(actions[0].kind == Action::Kind::kAddNode);
  state = env.apply(state, actions[0]);
  // Two nodes, newest floating: add-node is illegal, the only action is 1->2.
  actions = env.legal_actions(state);
  REQUIRE(actions.size() == 1);
  CHECK(actions[0].kind == Action::Kind::kAddEdge);
  CHECK(actions[0].source == 1);
  CHECK_THROWS_AS(env.apply(state, Action::add_node(0)), std::invalid_argument);
  state = env.apply(state, actions[0]);
  // Newest connected again: add-node only, since 1->2 already exists.
  actions = env.legal_actions(state);
  REQUIRE(actions.size() == 1);
  CHECK(actions[0].kind == Action::Kind::kAddNode);
}

TEST_CASE("single mode: action count stays within b + (n-1)") {
  Rng rng(71);
  const Dag target = random_target(5, 3, rng);
  const Env env = make_env(target, ActionMode::kSingle);
  Dag state = env.reset();
  while (!env.is_terminal(state)) {
    const std::vector<Action> actions = env.legal_actions(state);
    CHECK(actions.size() <=
          static_cast<std::size_t>(target.num_types()) +
              static_cast<std::size_t>(std::max(0, state.size() - 1)));
    state = env.apply(state, actions[rng.uniform_below(actions.size())]);
  }
}

TEST_CASE("single mode: terminal at target size once the last node is connected") {
  const Dag target = path(3);
  const Env env = make_env(target, ActionMode::kSingle);
  Dag state = env.reset();
  state = env.apply(state, Action::add_node(0));
  state = env.apply(state, Action::add_node(0));
  state = env.apply(state, Action::add_edge(1));
  CHECK_FALSE(env.is_terminal(state));
  state = env.apply(state, Action::add_node(0));
  CHECK_FALSE(env.is_terminal(state));  // three nodes but newest is floating
  const StepOutcome final_step = env.step(state, Action::add_edge(2));
  CHECK(final_step.terminal);
  CHECK(final_step.reward == 1.0);  // 1->2, 2->3 is the path
}

TEST_CASE("single mode: episode length equals n plus the final edge count") {
  Rng rng(72);
  for (int trial = 0; trial < 30; ++trial) {
    const Dag target = random_target(4, 1, rng);
    const Env env = make_env(target, ActionMode::kSingle);
    Dag state = env.reset();
    int steps = 0;
    while (!env.is_terminal(state)) {
      const std::vector<Action> actions = env.legal_actions(state);
      state = env.step(state, actions[rng.uniform_below(actions.size())]).next_state;
      ++steps;
    }
    CHECK(steps == state.size() + state.edge_count());
    CHECK(state.in_degree(state.size()) == 1);  // the completing edge ends the episode
  }
}

TEST_CASE("step is a pure function of (state, action, config)") {
  Rng rng(90);
  const Dag target = random_target(4, 2, rng);
  const Env env = make_env(target);
  const Dag state = path(2, 2);
  const Action a = Action::add_node_with_edges(1, 2);
  const StepOutcome first = env.step(state, a);
  const StepOutcome second = env.step(state, a);
  CHECK(first.next_state == second.next_state);
  CHECK(first.reward == second.reward);
  CHECK(first.terminal == second.terminal);
}

TEST_CASE("random_policy_success_probability matches enumeration") {
  const Env env3 = make_env(path(3));
  CHECK(random_policy_success_probability(env3) == Catch::Approx(1.0 / 3.0));
  Rng rng(14);
  const Dag target = random_target(4, 1, rng);
  const Env env4 = make_env(target);
  const double p = random_policy_success_probability(env4);
  CHECK(p == Catch::Approx(static_cast<double>(count_isomorphic_to(target)) / 21.0));
  const Env single_env = make_env(target, ActionMode::kSingle);
  CHECK_THROWS_AS(random_policy_success_probability(single_env), std::logic_error);
}

TEST_CASE("terminal reward hook overrides the isomorphism reward") {
  EnvConfig cfg{path(2), ActionMode::kEdgeSet};
  cfg.terminal_reward = [](const Dag& final_state, const Dag&) {
    return static_cast<double>(final_state.edge_count()) * 2.0;
  };
  const Env env(cfg);
  Dag state = env.reset();
  state = env.apply(state, Action::add_node_with_edges(0));
  const StepOutcome out = env.step(state, Action::add_node_with_edges(0, 1));
  CHECK(out.terminal);
  CHECK(out.reward == 2.0);
}
