#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dagq/dag.hpp"
#include "dagq/env.hpp"
#include "dagq/qnet.hpp"
#include "dagq/rng.hpp"

namespace dagq {

struct DqnConfig {
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_episodes = 5000;  // linear decay, then flat
  double learning_rate = 1e-3;
  int target_sync_episodes = 50;

  enum class Loss { kSquared, kAbsolute };
  Loss loss = Loss::kSquared;

  bool per_enabled = false;
  int per_replays_per_step = 30;
  int per_capacity = 2000;
  double per_reward_weight = 10.0;
  double per_recency_weight = 1.0;
};

struct Transition {
  Dag state;
  Action action;
  double reward = 0.0;
  Dag next_state;
  bool terminal = false;
  double priority = 0.0;  // static (reward) part of the sampling weight
  std::uint64_t age = 0;  // insertion counter, assigned by the buffer
};

// FIFO replay buffer with weighted sampling. The weight of a stored
// transition blends its reward with how recently it was inserted:
//
//   w_i = reward_weight * reward_i + recency_weight * recency_i + 1e-3
//   recency_i = (age_i - min_age) / (max_age - min_age + 1)
//
// Sampling is with replacement, proportional to w.
class ReplayBuffer {
 public:
  ReplayBuffer(int capacity, double reward_weight, double recency_weight)
      : capacity_(capacity), reward_weight_(reward_weight),
        recency_weight_(recency_weight) {
    if (capacity < 1) throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const Transition& at(std::size_t i) const { return entries_.at(i); }

  void insert(Transition t) {
    t.age = next_age_++;
    t.priority = reward_weight_ * t.reward + kWeightFloor;
    if (entries_.size() == static_cast<std::size_t>(capacity_)) entries_.pop_front();
    entries_.push_back(std::move(t));
  }

  double weight_of(std::size_t i) const {
    const std::uint64_t min_age = entries_.front().age;
    const std::uint64_t max_age = entries_.back().age;
    const double recency = static_cast<double>(entries_[i].age - min_age) /
                           static_cast<double>(max_age - min_age + 1);
    return reward_weight_ * entries_[i].reward + recency_weight_ * recency + kWeightFloor;
  }

  // m indices drawn with replacement proportional to the current weights.
  std::vector<std::size_t> sample_indices(int m, Rng& rng) const {
    if (entries_.empty()) throw std::logic_error("ReplayBuffer: sample from empty buffer");
    std::vector<double> cumulative(entries_.size());
    double total = 0.0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      total += weight_of(i);
      cumulative[i] = total;
    }
    std::vector<std::size_t> picks(static_cast<std::size_t>(m));
    for (auto& pick : picks) {
      const double u = rng.uniform01() * total;
      pick = static_cast<std::size_t>(
          std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      if (pick >= entries_.size()) pick = entries_.size() - 1;
    }
    return picks;
  }

  std::vector<Transition> sample(int m, Rng& rng) const {
    std::vector<Transition> out;
    out.reserve(static_cast<std::size_t>(m));
    for (std::size_t i : sample_indices(m, rng)) out.push_back(entries_[i]);
    return out;
  }

 private:
  static constexpr double kWeightFloor = 1e-3;

  int capacity_;
  double reward_weight_;
  double recency_weight_;
  std::uint64_t next_age_ = 0;
  std::deque<Transition> entries_;
};

// Epsilon-greedy selection over the legal actions. Greedy ties break toward
// the lowest action index. epsilon = 0 consumes no randomness; epsilon = 1
// consumes exactly one draw.
inline Action select_action(const Dag& state, const QNetParams& params, const Env& env,
                            double epsilon, Rng& rng) {
  const std::vector<Action> actions = env.legal_actions(state);
  const bool explore =
      epsilon >= 1.0 || (epsilon > 0.0 && rng.uniform01() < epsilon);
  if (explore)
    return actions[static_cast<std::size_t>(rng.uniform_below(actions.size()))];
  const std::vector<double> q = evaluate_actions(params, state, actions, env);
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i)
    if (q[i] > q[best]) best = i;
  return actions[best];
}

// Bootstrap target: r for terminal transitions, else
// r + gamma * max_a Q_target(next_state, a).
inline double td_target(double reward, const Dag& next_state, bool terminal,
                        const QNetParams& target_params, const Env& env, double gamma) {
  if (terminal) return reward;
  const std::vector<Action> actions = env.legal_actions(next_state);
  const std::vector<double> q = evaluate_actions(target_params, next_state, actions, env);
  return reward + gamma * *std::max_element(q.begin(), q.end());
}

// One online update: Q(s, a) is the policy score of the successor graph,
// delta = Q(s, a) - td_target, loss is 1/2 delta^2 (squared) or |delta|
// (absolute), and one gradient-descent step at the configured learning rate
// is applied to the policy parameters. Returns the loss.
inline double train_step(QNetParams& policy, const Transition& t,
                         const QNetParams& target_params, const Env& env,
                         const DqnConfig& cfg) {
  const double y = td_target(t.reward, t.next_state, t.terminal, target_params, env,
                             cfg.gamma);
  TapedForward tf = taped_forward(policy, t.next_state);
  const double delta = tf.q() - y;
  // d(loss)/dQ: delta for squared loss, sign(delta) for absolute.
  double loss = 0.0;
  double upstream = 0.0;
  if (cfg.loss == DqnConfig::Loss::kSquared) {
    loss = 0.5 * delta * delta;
    upstream = delta;
  } else {
    loss = std::abs(delta);
    upstream = delta > 0.0 ? 1.0 : (delta < 0.0 ? -1.0 : 0.0);
  }
  if (upstream != 0.0) {
    QNetParams grads;
    tf.backward(upstream, grads);
    for (auto [name, field] : QNetParams::kFields) {
      Matrix& w = policy.*field;
      const Matrix& g = grads.*field;
      for (std::size_t i = 0; i < w.count(); ++i)
        w.data()[i] -= cfg.learning_rate * g.data()[i];
    }
  }
  return loss;
}

enum class EpisodeMode { kTrain, kGreedy, kRandom };

struct EpisodeResult {
  double total_reward = 0.0;
  bool success = false;
  int steps = 0;
  double mean_loss = 0.0;
  int train_steps = 0;
  double epsilon = 0.0;
};

// Greedy rollout under fixed parameters; no learning, no randomness.
inline EpisodeResult greedy_rollout(const Env& env, const QNetParams& params,
                                    Dag* final_state = nullptr) {
  Rng unused(0);
  EpisodeResult result;
  Dag state = env.reset();
  while (!env.is_terminal(state)) {
    const Action a = select_action(state, params, env, 0.0, unused);
    StepOutcome out = env.step(state, a);
    result.total_reward += out.reward;
    ++result.steps;
    state = std::move(out.next_state);
  }
  result.success = result.total_reward > 0.0;
  if (final_state) *final_state = std::move(state);
  return result;
}

// Online deep Q-learning driver: one policy network, one delayed target
// network, optional prioritized replay. Owns its RNG, so runs with distinct
// seeds are fully independent.
class DqnAgent {
 public:
  DqnAgent(Env env, const QNetConfig& qnet_config, DqnConfig config, std::uint64_t seed)
      : env_(std::move(env)), cfg_(config), rng_(seed),
        policy_(init_params(qnet_config, rng_)), target_(policy_),
        buffer_(config.per_capacity, config.per_reward_weight, config.per_recency_weight) {
    if (qnet_config.input_width != env_.num_types())
      throw std::invalid_argument("DqnAgent: network input width " +
                                  std::to_string(qnet_config.input_width) +
                                  " does not match type count " +
                                  std::to_string(env_.num_types()));
  }

  const Env& env() const noexcept { return env_; }
  const QNetParams& policy() const noexcept { return policy_; }
  const QNetParams& target_net() const noexcept { return target_; }
  const ReplayBuffer& buffer() const noexcept { return buffer_; }
  int episodes_trained() const noexcept { return episodes_trained_; }

  void set_policy(const QNetParams& p) {
    copy_into(p, policy_);
    copy_into(p, target_);
  }

  double epsilon_for_episode(int episode) const {
    if (cfg_.epsilon_decay_episodes <= 0) return cfg_.epsilon_end;
    if (episode >= cfg_.epsilon_decay_episodes) return cfg_.epsilon_end;
    const double t = static_cast<double>(episode) / cfg_.epsilon_decay_episodes;
    return cfg_.epsilon_start + t * (cfg_.epsilon_end - cfg_.epsilon_start);
  }

  EpisodeResult run_episode(EpisodeMode mode) {
    switch (mode) {
      case EpisodeMode::kGreedy:
        return greedy_rollout(env_, policy_);
      case EpisodeMode::kRandom:
        return random_episode();
      case EpisodeMode::kTrain:
        return train_episode();
    }
    throw std::logic_error("run_episode: unknown mode");
  }

 private:
  EpisodeResult random_episode() {
    EpisodeResult result;
    result.epsilon = 1.0;
    Dag state = env_.reset();
    while (!env_.is_terminal(state)) {
      const std::vector<Action> actions = env_.legal_actions(state);
      const Action a = actions[static_cast<std::size_t>(rng_.uniform_below(actions.size()))];
      StepOutcome out = env_.step(state, a);
      result.total_reward += out.reward;
      ++result.steps;
      state = std::move(out.next_state);
    }
    result.success = result.total_reward > 0.0;
    return result;
  }

  EpisodeResult train_episode() {
    if (cfg_.target_sync_episodes > 0 &&
        episodes_trained_ % cfg_.target_sync_episodes == 0)
      copy_into(policy_, target_);

    EpisodeResult result;
    result.epsilon = epsilon_for_episode(episodes_trained_);
    double total_loss = 0.0;
    Dag state = env_.reset();
    while (!env_.is_terminal(state)) {
      const Action a = select_action(state, policy_, env_, result.epsilon, rng_);
      StepOutcome out = env_.step(state, a);
      Transition t{state, a, out.reward, out.next_state, out.terminal};
      total_loss += train_step(policy_, t, target_, env_, cfg_);
      ++result.train_steps;
      if (cfg_.per_enabled) {
        buffer_.insert(std::move(t));
        for (std::size_t i : buffer_.sample_indices(cfg_.per_replays_per_step, rng_)) {
          total_loss += train_step(policy_, buffer_.at(i), target_, env_, cfg_);
          ++result.train_steps;
        }
      }
      result.total_reward += out.reward;
      ++result.steps;
      state = std::move(out.next_state);
    }
    result.success = result.total_reward > 0.0;
    result.mean_loss = result.train_steps > 0 ? total_loss / result.train_steps : 0.0;
    ++episodes_trained_;
    return result;
  }

  Env env_;
  DqnConfig cfg_;
  Rng rng_;
  QNetParams policy_;
  QNetParams target_;
  ReplayBuffer buffer_;
  int episodes_trained_ = 0;
};

// --- Exact dynamic-programming oracle ---------------------------------------
//
// The MDP's state graph is a finite DAG (deterministic transitions, reward
// only on entering a terminal state), so Q* follows from backward induction:
//   Q*(s, a) = r(s, a) + gamma * max_a' Q*(s', a'),  V*(terminal) = 0.
// Feasible only for tiny instances; guarded at n <= 5, b <= 2.
struct ExactQTable {
  double gamma = 0.0;
  // serialize(state) -> Q* per action, aligned with legal_actions ordering.
  std::unordered_map<std::string, std::vector<double>> q;

  const std::vector<double>& at(const Dag& state) const {
    auto it = q.find(dagq::serialize(state));
    if (it == q.end()) throw std::out_of_range("ExactQTable: unknown state");
    return it->second;
  }

  double state_value(const Dag& state) const {
    const std::vector<double>& qs = at(state);
    return *std::max_element(qs.begin(), qs.end());
  }
};

inline ExactQTable exact_q_iteration(const Env& env, double gamma) {
  if (env.target().size() > 5 || env.target().num_types() > 2)
    throw std::invalid_argument(
        "exact_q_iteration: guarded to n <= 5, b <= 2 (state space explodes)");
  ExactQTable table;
  table.gamma = gamma;

  auto value = [&](auto&& self, const Dag& state) -> double {
    if (env.is_terminal(state)) return 0.0;
    const std::string key = serialize(state);
    if (auto it = table.q.find(key); it != table.q.end())
      return *std::max_element(it->second.begin(), it->second.end());
    const std::vector<Action> actions = env.legal_actions(state);
    std::vector<double> qs;
    qs.reserve(actions.size());
    for (const Action& a : actions) {
      StepOutcome out = env.step(state, a);
      qs.push_back(out.reward + (out.terminal ? 0.0 : gamma * self(self, out.next_state)));
    }
    const double v = *std::max_element(qs.begin(), qs.end());
    table.q.emplace(key, std::move(qs));
    return v;
  };
  value(value, env.reset());
  return table;
}

}  // namespace dagq
