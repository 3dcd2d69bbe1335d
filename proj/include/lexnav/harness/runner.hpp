// Copyright 2026 The lexnav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lexnav/gridworld.hpp"
#include "lexnav/harness/config.hpp"
#include "lexnav/harness/metrics.hpp"
#include "lexnav/qlearn.hpp"
#include "lexnav/transfer.hpp"

namespace lexnav::harness {

struct RunResult {
  RunMetrics metrics;
  Agent agent;
};

inline Agent make_agent(const RunConfig& c, const Resources& res, Rng& rng) {
  if (c.agent == AgentKind::Tabular) return TabularQ{};
  DenseQConfig dc;
  dc.hidden = c.learner.hidden;
  dc.discount = c.learner.discount;
  dc.sync_period = c.learner.sync_period;
  dc.adam.learning_rate = c.learner.adam_lr;
  const std::size_t obs_len = static_cast<std::size_t>(res.map->width() + res.map->height());
  if (c.agent == AgentKind::DenseOneHot) {
    return DenseQ(obs_len, GoalEncoder::one_hot(res.map->objects()), dc, rng);
  }
  if (!res.store) throw ValidationError("agent dense-embedding needs an 'embeddings' file");
  return DenseQ(obs_len, GoalEncoder::embedding(res.store), dc, rng);
}

inline void check_goals(const RunConfig& c, const Resources& res, const std::vector<std::string>& goals) {
  if (goals.empty()) throw ValidationError("goal set is empty");
  for (const auto& g : goals) {
    if (!res.map->has_object(g)) throw ValidationError("goal '" + g + "' is not an object on the map");
    if (c.agent == AgentKind::DenseEmbedding && res.store && !res.store->contains(g)) {
      throw ValidationError("goal '" + g + "' has no embedding vector");
    }
  }
}

/// The episode loop shared by plain and transfer training. Deterministic
/// given `c.seed`: one engine drives goal sampling, spawns, exploration,
/// tie-breaks, network init and replay sampling.
inline RunResult train_loop(const RunConfig& c, const Resources& res, const std::vector<std::string>& goals,
                            const PriorPolicy* prior) {
  c.validate();
  check_goals(c, res, goals);
  Rng rng(c.seed);
  RunResult result{RunMetrics{}, make_agent(c, res, rng)};
  RunMetrics& m = result.metrics;
  if (prior) m.prior_word = prior->goal;

  GridEnv env(res.map, c.reward);
  std::optional<ReplayBuffer> replay;
  if (c.agent != AgentKind::Tabular) replay.emplace(c.learner.replay_capacity);

  long step = 0;
  std::array<long, 3> decisions{};
  auto log_row = [&] {
    const auto w = trailing(m.episodes, m.episodes.size(), c.criterion_window);
    MetricsRow row;
    row.env_step = step;
    row.episodes = static_cast<long>(m.episodes.size());
    if (w.count > 0) {
      row.success_rate = static_cast<double>(w.successes) / static_cast<double>(w.count);
      row.mean_return = w.return_sum / static_cast<double>(w.count);
      row.mean_ep_len = static_cast<double>(w.length_sum) / static_cast<double>(w.count);
    }
    row.epsilon = epsilon_at(c.schedule, step);
    const long total = decisions[0] + decisions[1] + decisions[2];
    if (total > 0) {
      row.frac_greedy = static_cast<double>(decisions[0]) / static_cast<double>(total);
      row.frac_prior = static_cast<double>(decisions[1]) / static_cast<double>(total);
      row.frac_random = static_cast<double>(decisions[2]) / static_cast<double>(total);
    }
    decisions = {};
    m.rows.push_back(row);
  };

  auto learn = [&](Transition&& t) {
    if (auto* tab = std::get_if<TabularQ>(&result.agent)) {
      tabular_update(*tab, t, c.learner.tabular_lr, c.learner.discount);
      return;
    }
    auto& dense = std::get<DenseQ>(result.agent);
    replay->push(std::move(t));
    if (replay->size() >= c.learner.warmup && step % static_cast<long>(c.learner.train_every) == 0) {
      const auto batch = replay->sample(c.learner.batch, rng);
      dense_update(dense, batch);
    }
  };

  while (step < c.max_env_steps && !m.steps_to_criterion) {
    const std::string& goal = goals[uniform_index(rng, goals.size())];
    Observation obs = env.reset(goal, rng);
    EpisodeRecord ep;
    StepOutcome out;
    do {
      const double eps = epsilon_at(c.schedule, step);
      const auto decision = std::visit(
          [&](const auto& a) { return explore_action(a, obs, goal, prior, eps, c.schedule.alpha, rng); },
          result.agent);
      out = env.step(decision.action);
      ++step;
      ++decisions[static_cast<int>(decision.source)];
      ep.episode_return += out.reward;
      ++ep.length;
      learn(Transition{std::move(obs), goal, decision.action, out.reward, out.observation, out.done});
      obs = out.observation;
      if (step % c.log_period == 0) log_row();
    } while (!out.done && step < c.max_env_steps);

    ep.end_step = step;
    ep.success = out.success;
    m.episodes.push_back(ep);
    const auto w = trailing(m.episodes, m.episodes.size(), c.criterion_window);
    if (meets_criterion(w, c.criterion_window, c.criterion_rate)) m.steps_to_criterion = step;
  }
  if (step > 0 && (m.rows.empty() || m.rows.back().env_step != step)) log_row();
  m.total_steps = step;

  if (auto* dense = std::get_if<DenseQ>(&result.agent)) dense->set_trained_goals(goals);
  return result;
}

/// Trains a fresh agent on the configured goal set with plain
/// epsilon-greedy exploration.
inline RunResult run_training(const RunConfig& c, const Resources& res) {
  return train_loop(c, res, c.goals, nullptr);
}

inline RunResult run_training(const RunConfig& c) { return run_training(c, load_resources(c)); }

inline Agent load_policy_file(const std::string& path, const Resources& res) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open policy checkpoint '" + path + "'");
  return load_policy(in, res.store);
}

/// Resolves the prior for a transfer run: "auto" picks the mastered goal
/// nearest the target in embedding space, "none" disables the prior, any
/// other value must be one of the mastered goals.
inline std::optional<PriorPolicy> resolve_prior(const RunConfig& c, const Resources& res,
                                                std::shared_ptr<const Agent> policy) {
  if (c.transfer.prior == "none") return std::nullopt;
  std::vector<std::string> mastered = c.transfer.mastered.empty() ? trained_goals(*policy) : c.transfer.mastered;
  std::erase(mastered, c.transfer.target);
  if (mastered.empty()) throw ValidationError("prior policy has no mastered goals besides the target");
  std::string word = c.transfer.prior;
  if (word == "auto") {
    if (!res.store) throw ValidationError("transfer.prior = auto needs an 'embeddings' file");
    word = select_prior(*res.store, c.transfer.target, mastered).word;
  } else if (std::find(mastered.begin(), mastered.end(), word) == mastered.end()) {
    throw ValidationError("prior '" + word + "' is not a mastered goal of the checkpoint");
  }
  return PriorPolicy{word, std::move(policy)};
}

/// Trains a freshly initialised agent on the single transfer target,
/// mixing in the frozen prior's actions with rate schedule.alpha.
inline RunResult run_transfer(const RunConfig& c, const Resources& res, std::shared_ptr<const Agent> policy) {
  if (c.transfer.target.empty()) throw ValidationError("transfer.target is not set");
  const auto prior = resolve_prior(c, res, std::move(policy));
  return train_loop(c, res, {c.transfer.target}, prior ? &*prior : nullptr);
}

inline RunResult run_transfer(const RunConfig& c, const Resources& res) {
  if (c.transfer.checkpoint.empty()) throw ValidationError("transfer.checkpoint is not set");
  auto policy = std::make_shared<const Agent>(load_policy_file(c.transfer.checkpoint, res));
  return run_transfer(c, res, std::move(policy));
}

struct Evaluation {
  double success_rate = 0.0;
  double mean_length = 0.0;
};

using PolicyFn = std::function<Action(const Observation&, std::string_view goal, Rng&)>;

/// Runs `n_episodes` with goals drawn uniformly from `goals` and uniform
/// corridor spawns.
inline Evaluation evaluate(const PolicyFn& policy, std::shared_ptr<const ApartmentMap> map,
                           const std::vector<std::string>& goals, int n_episodes, std::uint64_t seed,
                           RewardConfig reward = {}) {
  if (n_episodes <= 0) throw ValidationError("evaluate: n_episodes must be positive");
  if (goals.empty()) throw ValidationError("evaluate: no goals");
  Rng rng(seed);
  GridEnv env(std::move(map), reward);
  long successes = 0, length_sum = 0;
  for (int e = 0; e < n_episodes; ++e) {
    const std::string& goal = goals[uniform_index(rng, goals.size())];
    Observation obs = env.reset(goal, rng);
    StepOutcome out;
    do {
      out = env.step(policy(obs, goal, rng));
      obs = out.observation;
    } while (!out.done);
    successes += out.success ? 1 : 0;
    length_sum += env.state().steps_taken;
  }
  return {static_cast<double>(successes) / n_episodes, static_cast<double>(length_sum) / n_episodes};
}

inline PolicyFn greedy_policy(std::shared_ptr<const Agent> agent) {
  return [agent](const Observation& obs, std::string_view goal, Rng& rng) {
    return greedy_action(*agent, obs, goal, rng);
  };
}

inline Evaluation evaluate(const Agent& agent, std::shared_ptr<const ApartmentMap> map,
                           const std::vector<std::string>& goals, int n_episodes, std::uint64_t seed) {
  return evaluate(greedy_policy(std::make_shared<const Agent>(agent)), std::move(map), goals, n_episodes, seed);
}

/// Greedy episode length from every spawn cell, in spawn order.
template <typename A>
std::vector<int> greedy_lengths_from_spawns(const A& agent, std::shared_ptr<const ApartmentMap> map,
                                            std::string_view goal, std::uint64_t seed) {
  Rng rng(seed);
  GridEnv env(map);
  std::vector<int> lengths;
  for (const Cell s : map->spawn_cells()) {
    Observation obs = env.reset_at(s, goal);
    StepOutcome out;
    do {
      out = env.step(greedy_action(agent, obs, goal, rng));
      obs = out.observation;
    } while (!out.done);
    lengths.push_back(out.success ? env.state().steps_taken : -1);
  }
  return lengths;
}

}  // namespace lexnav::harness
