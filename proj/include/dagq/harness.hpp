#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dagq/agent.hpp"
#include "dagq/enumerate.hpp"
#include "dagq/env.hpp"

namespace dagq {

// Trailing moving average; the first window-1 entries average over the
// available prefix.
inline std::vector<double> moving_average(const std::vector<double>& series, int window = 50) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
  if (series.empty()) throw std::invalid_argument("moving_average: empty series");
  std::vector<double> out(series.size());
  double running = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    running += series[i];
    if (i >= static_cast<std::size_t>(window)) running -= series[i - window];
    const std::size_t span = std::min(i + 1, static_cast<std::size_t>(window));
    out[i] = running / static_cast<double>(span);
  }
  return out;
}

enum class AgentKind { kRandom, kDqn, kDqnPer };

inline const char* to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kRandom: return "random";
    case AgentKind::kDqn: return "dqn";
    case AgentKind::kDqnPer: return "dqn-per";
  }
  return "?";
}

inline AgentKind agent_kind_from(const std::string& name) {
  if (name == "random") return AgentKind::kRandom;
  if (name == "dqn") return AgentKind::kDqn;
  if (name == "dqn-per") return AgentKind::kDqnPer;
  throw std::invalid_argument("unknown agent '" + name + "' (random | dqn | dqn-per)");
}

struct ExperimentConfig {
  int graph_size = 4;
  int type_count = 1;
  int episodes = 10000;
  int runs = 20;
  AgentKind agent = AgentKind::kDqn;
  ActionMode action_mode = ActionMode::kEdgeSet;
  DqnConfig dqn;
  int qnet_conv1 = 32;
  int qnet_conv2 = 32;
  int qnet_pooled = 32;
  std::uint64_t seed_base = 1;
  std::string output_dir = "out";
  int workers = 0;               // 0: one per hardware thread
  bool save_checkpoints = false;
  bool epsilon_decay_explicit = false;  // set when the decay came from file/CLI

  void validate() const {
    if (graph_size < 1 || graph_size > kMaxNodes)
      throw std::invalid_argument("config: graph size out of range");
    if (type_count < 1 || type_count > 255)
      throw std::invalid_argument("config: type count out of range");
    if (episodes < 1) throw std::invalid_argument("config: episodes must be >= 1");
    if (runs < 1) throw std::invalid_argument("config: runs must be >= 1");
  }

  QNetConfig qnet_config() const {
    return QNetConfig{type_count, qnet_conv1, qnet_conv2, qnet_pooled};
  }

  // Epsilon decays over the first half of training unless pinned explicitly.
  DqnConfig effective_dqn() const {
    DqnConfig d = dqn;
    d.per_enabled = agent == AgentKind::kDqnPer;
    if (!epsilon_decay_explicit) d.epsilon_decay_episodes = episodes / 2;
    return d;
  }

  // Seed policy: run r draws its target from seed_base + r and its agent RNG
  // from seed_base + 10000 + r, so experiments with equal seed_base see the
  // same targets regardless of agent or action mode.
  std::uint64_t target_seed(int run) const { return seed_base + static_cast<std::uint64_t>(run); }
  std::uint64_t agent_seed(int run) const {
    return seed_base + 10000 + static_cast<std::uint64_t>(run);
  }
};

struct RunRecord {
  int run = 0;
  int episode = 0;
  double train_reward = 0.0;
  int greedy_success = 0;
  double epsilon = 0.0;
  double mean_loss = 0.0;
};

struct RunResult {
  int run = 0;
  Dag target{1};
  std::vector<RunRecord> records;
  double total_train_reward = 0.0;
  int total_greedy_success = 0;
  double final_window_greedy_rate = 0.0;  // greedy success rate, last 1000 episodes
};

struct ExperimentSummary {
  ExperimentConfig config;
  std::vector<RunResult> runs;
  double mean_total_train_reward = 0.0;
  double mean_total_greedy_success = 0.0;
  // Mean greedy success per episode index across runs (the learning curve).
  std::vector<double> mean_greedy_curve;
};

namespace detail {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

// One run: fresh target, fresh agent, `episodes` training (or random)
// episodes, a greedy evaluation after each training episode.
inline RunResult execute_run(const ExperimentConfig& cfg, int run) {
  RunResult result;
  result.run = run;
  Rng target_rng(cfg.target_seed(run));
  result.target = random_target(cfg.graph_size, cfg.type_count, target_rng);

  Env env(EnvConfig{result.target, cfg.action_mode});
  DqnAgent agent(env, cfg.qnet_config(), cfg.effective_dqn(), cfg.agent_seed(run));

  result.records.reserve(static_cast<std::size_t>(cfg.episodes));
  const int window = std::min(cfg.episodes, 1000);
  for (int episode = 0; episode < cfg.episodes; ++episode) {
    RunRecord rec;
    rec.run = run;
    rec.episode = episode;
    if (cfg.agent == AgentKind::kRandom) {
      // The random baseline has no greedy policy; both columns describe the
      // same uniform-random rollout.
      const EpisodeResult ep = agent.run_episode(EpisodeMode::kRandom);
      rec.train_reward = ep.total_reward;
      rec.greedy_success = ep.success ? 1 : 0;
      rec.epsilon = 1.0;
    } else {
      const EpisodeResult train = agent.run_episode(EpisodeMode::kTrain);
      const EpisodeResult greedy = agent.run_episode(EpisodeMode::kGreedy);
      rec.train_reward = train.total_reward;
      rec.greedy_success = greedy.success ? 1 : 0;
      rec.epsilon = train.epsilon;
      rec.mean_loss = train.mean_loss;
    }
    result.total_train_reward += rec.train_reward;
    result.total_greedy_success += rec.greedy_success;
    if (episode >= cfg.episodes - window)
      result.final_window_greedy_rate += rec.greedy_success;
    result.records.push_back(rec);
  }
  result.final_window_greedy_rate /= window;

  if (cfg.save_checkpoints && cfg.agent != AgentKind::kRandom) {
    const std::filesystem::path path = std::filesystem::path(cfg.output_dir) /
        (std::string(to_string(cfg.agent)) + "_run" + std::to_string(run) + "_policy.qnet");
    save_params(agent.policy(), path.string());
  }
  return result;
}

inline void write_records_csv(const std::filesystem::path& path,
                              const std::vector<RunResult>& runs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "run,episode,train_reward,greedy_success,epsilon,mean_loss\n";
  for (const RunResult& r : runs)
    for (const RunRecord& rec : r.records)
      out << rec.run << ',' << rec.episode << ',' << format_double(rec.train_reward)
          << ',' << rec.greedy_success << ',' << format_double(rec.epsilon) << ','
          << format_double(rec.mean_loss) << '\n';
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

inline void write_summary_csv(const std::filesystem::path& path,
                              const ExperimentSummary& summary) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "run,total_train_reward,total_greedy_success,final_1000_greedy_rate\n";
  for (const RunResult& r : summary.runs)
    out << r.run << ',' << format_double(r.total_train_reward) << ','
        << r.total_greedy_success << ',' << format_double(r.final_window_greedy_rate)
        << '\n';
  out << "mean," << format_double(summary.mean_total_train_reward) << ','
      << format_double(summary.mean_total_greedy_success) << ",\n";
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

inline void write_curve_csv(const std::filesystem::path& path,
                            const std::vector<double>& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  const std::vector<double> smooth = moving_average(curve, 50);
  out << "episode,mean_greedy_success,moving_avg_50\n";
  for (std::size_t i = 0; i < curve.size(); ++i)
    out << i << ',' << format_double(curve[i]) << ',' << format_double(smooth[i]) << '\n';
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

inline void write_targets(const std::filesystem::path& path,
                          const std::vector<RunResult>& runs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  for (const RunResult& r : runs) out << serialize(r.target) << '\n';
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace detail

// Runs `cfg.runs` independent seeded runs (scheduled across workers), then
// writes per-agent CSVs: <agent>_records.csv, <agent>_summary.csv,
// <agent>_success_curve.csv and <agent>_targets.txt under cfg.output_dir.
// Output bytes depend only on the config, never on scheduling.
inline ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.output_dir);

  ExperimentSummary summary;
  summary.config = cfg;
  summary.runs.resize(static_cast<std::size_t>(cfg.runs));

  int workers = cfg.workers > 0 ? cfg.workers
                                : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, cfg.runs));
  std::atomic<int> next_run{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (;;) {
          const int run = next_run.fetch_add(1);
          if (run >= cfg.runs) return;
          summary.runs[static_cast<std::size_t>(run)] = detail::execute_run(cfg, run);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  for (const RunResult& r : summary.runs) {
    summary.mean_total_train_reward += r.total_train_reward;
    summary.mean_total_greedy_success += r.total_greedy_success;
  }
  summary.mean_total_train_reward /= cfg.runs;
  summary.mean_total_greedy_success /= cfg.runs;

  summary.mean_greedy_curve.assign(static_cast<std::size_t>(cfg.episodes), 0.0);
  for (const RunResult& r : summary.runs)
    for (const RunRecord& rec : r.records)
      summary.mean_greedy_curve[static_cast<std::size_t>(rec.episode)] +=
          rec.greedy_success;
  for (double& x : summary.mean_greedy_curve) x /= cfg.runs;

  const std::filesystem::path dir(cfg.output_dir);
  const std::string agent = to_string(cfg.agent);
  detail::write_records_csv(dir / (agent + "_records.csv"), summary.runs);
  detail::write_summary_csv(dir / (agent + "_summary.csv"), summary);
  detail::write_curve_csv(dir / (agent + "_success_curve.csv"), summary.mean_greedy_curve);
  detail::write_targets(dir / (agent + "_targets.txt"), summary.runs);
  return summary;
}

struct CompareSummary {
  ExperimentSummary edge_set;
  ExperimentSummary single;
};

// Fig-3-style comparison: the same experiment under both action encodings
// with matched seeds (hence matched targets), paired CSV output plus a
// per-run comparison of final-1000-episode greedy success.
inline CompareSummary compare_action_modes(const ExperimentConfig& cfg) {
  ExperimentConfig edge_cfg = cfg;
  edge_cfg.action_mode = ActionMode::kEdgeSet;
  edge_cfg.output_dir = (std::filesystem::path(cfg.output_dir) / "edge-set").string();
  ExperimentConfig single_cfg = cfg;
  single_cfg.action_mode = ActionMode::kSingle;
  single_cfg.output_dir = (std::filesystem::path(cfg.output_dir) / "single").string();

  CompareSummary summary{run_experiment(edge_cfg), run_experiment(single_cfg)};

  const std::filesystem::path path = std::filesystem::path(cfg.output_dir) /
                                     "compare_summary.csv";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "run,edge_set_final_1000_greedy_rate,single_final_1000_greedy_rate\n";
  for (int r = 0; r < cfg.runs; ++r)
    out << r << ','
        << detail::format_double(
               summary.edge_set.runs[static_cast<std::size_t>(r)].final_window_greedy_rate)
        << ','
        << detail::format_double(
               summary.single.runs[static_cast<std::size_t>(r)].final_window_greedy_rate)
        << '\n';
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
  return summary;
}

// --- Config files -------------------------------------------------------
//
// Flat key=value lines with optional [dqn], [per] and [qnet] sections; '#'
// starts a comment. CLI flags override file values.

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace detail

inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
  const auto as_int = [&] { return std::stoi(value); };
  const auto as_double = [&] { return std::stod(value); };
  if (key == "n") cfg.graph_size = as_int();
  else if (key == "b") cfg.type_count = as_int();
  else if (key == "episodes") cfg.episodes = as_int();
  else if (key == "runs") cfg.runs = as_int();
  else if (key == "agent") cfg.agent = agent_kind_from(value);
  else if (key == "action_mode") {
    if (value == "edge-set") cfg.action_mode = ActionMode::kEdgeSet;
    else if (value == "single") cfg.action_mode = ActionMode::kSingle;
    else throw std::invalid_argument("action_mode must be edge-set or single");
  }
  else if (key == "seed") cfg.seed_base = std::stoull(value);
  else if (key == "outdir") cfg.output_dir = value;
  else if (key == "workers") cfg.workers = as_int();
  else if (key == "save_checkpoints") cfg.save_checkpoints = value == "1" || value == "true";
  else if (key == "dqn.gamma") cfg.dqn.gamma = as_double();
  else if (key == "dqn.epsilon_start") cfg.dqn.epsilon_start = as_double();
  else if (key == "dqn.epsilon_end") cfg.dqn.epsilon_end = as_double();
  else if (key == "dqn.epsilon_decay_episodes") {
    cfg.dqn.epsilon_decay_episodes = as_int();
    cfg.epsilon_decay_explicit = true;
  }
  else if (key == "dqn.learning_rate") cfg.dqn.learning_rate = as_double();
  else if (key == "dqn.target_sync_episodes") cfg.dqn.target_sync_episodes = as_int();
  else if (key == "dqn.loss") {
    if (value == "squared") cfg.dqn.loss = DqnConfig::Loss::kSquared;
    else if (value == "absolute") cfg.dqn.loss = DqnConfig::Loss::kAbsolute;
    else throw std::invalid_argument("dqn.loss must be squared or absolute");
  }
  else if (key == "per.replays_per_step") cfg.dqn.per_replays_per_step = as_int();
  else if (key == "per.capacity") cfg.dqn.per_capacity = as_int();
  else if (key == "per.reward_weight") cfg.dqn.per_reward_weight = as_double();
  else if (key == "per.recency_weight") cfg.dqn.per_recency_weight = as_double();
  else if (key == "qnet.conv1") cfg.qnet_conv1 = as_int();
  else if (key == "qnet.conv2") cfg.qnet_conv2 = as_int();
  else if (key == "qnet.pooled") cfg.qnet_pooled = as_int();
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  ExperimentConfig cfg;
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "dqn" && section != "per" && section != "qnet")
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    try {
      apply_config_entry(cfg, section.empty() ? key : section + "." + key, value);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

}  // namespace dagq
