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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "lexnav/embedding.hpp"
#include "lexnav/error.hpp"
#include "lexnav/gridworld.hpp"
#include "lexnav/nn.hpp"
#include "lexnav/rng.hpp"

namespace lexnav {

using QValues = std::array<double, kNumActions>;

enum class GoalMode { OneHot, Embedding };

inline const char* goal_mode_name(GoalMode m) {
  return m == GoalMode::OneHot ? "onehot" : "embedding";
}

struct GoalVector {
  GoalMode mode;
  std::vector<double> values;
};

/// Maps goal words to network inputs, either as one-hot over a fixed
/// vocabulary or as the word's pretrained embedding.
class GoalEncoder {
 public:
  static GoalEncoder one_hot(std::vector<std::string> vocabulary) {
    if (vocabulary.empty()) throw ValidationError("one-hot vocabulary is empty");
    GoalEncoder e;
    e.mode_ = GoalMode::OneHot;
    e.vocabulary_ = std::move(vocabulary);
    std::set<std::string> seen;
    for (const auto& w : e.vocabulary_) {
      if (!seen.insert(w).second) throw ValidationError("duplicate vocabulary word '" + w + "'");
    }
    return e;
  }

  static GoalEncoder embedding(std::shared_ptr<const EmbeddingStore> store) {
    if (!store) throw UsageError("embedding goal encoder needs a store");
    GoalEncoder e;
    e.mode_ = GoalMode::Embedding;
    e.store_ = std::move(store);
    return e;
  }

  GoalMode mode() const { return mode_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::shared_ptr<const EmbeddingStore>& store() const { return store_; }

  std::size_t length() const {
    return mode_ == GoalMode::OneHot ? vocabulary_.size() : store_->dimension();
  }

  GoalVector encode(std::string_view word) const {
    if (mode_ == GoalMode::Embedding) return {mode_, store_->vector(word).values};
    const auto it = std::find(vocabulary_.begin(), vocabulary_.end(), word);
    if (it == vocabulary_.end()) {
      throw LookupError("goal '" + std::string(word) + "' not in one-hot vocabulary");
    }
    std::vector<double> v(vocabulary_.size(), 0.0);
    v[static_cast<std::size_t>(it - vocabulary_.begin())] = 1.0;
    return {mode_, std::move(v)};
  }

 private:
  GoalMode mode_ = GoalMode::OneHot;
  std::vector<std::string> vocabulary_;
  std::shared_ptr<const EmbeddingStore> store_;
};

inline GoalVector encode_goal(std::string_view word, const GoalEncoder& encoder) {
  return encoder.encode(word);
}

struct Transition {
  Observation observation;
  std::string goal;
  Action action = Action::North;
  double reward = 0.0;
  Observation next_observation;
  bool done = false;
};

/// Index of the maximal value; ties are broken uniformly with `rng`. The
/// rng is only consumed when there is a tie.
inline Action argmax_action(const QValues& q, Rng& rng) {
  const double best = *std::max_element(q.begin(), q.end());
  std::array<int, kNumActions> ties{};
  std::size_t n = 0;
  for (int a = 0; a < kNumActions; ++a) {
    if (q[a] == best) ties[n++] = a;
  }
  const std::size_t pick = n == 1 ? 0 : static_cast<std::size_t>(uniform_index(rng, n));
  return static_cast<Action>(ties[pick]);
}

inline double max_value(const QValues& q) { return *std::max_element(q.begin(), q.end()); }

// ---------------------------------------------------------------------------
// Replay

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ValidationError("replay capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::uint64_t pushes() const { return pushes_; }

  void push(Transition t) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(t));
    } else {
      items_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
    ++pushes_;
  }

  /// Oldest first.
  const Transition& at(std::size_t age_rank) const {
    const std::size_t start = items_.size() < capacity_ ? 0 : next_;
    return items_[(start + age_rank) % items_.size()];
  }

  /// Uniform with replacement.
  std::vector<const Transition*> sample(std::size_t batch_size, Rng& rng) const {
    if (items_.empty()) throw UsageError("sample from an empty replay buffer");
    std::vector<const Transition*> out;
    out.reserve(batch_size);
    for (std::size_t k = 0; k < batch_size; ++k) {
      out.push_back(&items_[uniform_index(rng, items_.size())]);
    }
    return out;
  }

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t next_ = 0;
  std::uint64_t pushes_ = 0;
};

// ---------------------------------------------------------------------------
// Tabular learner

struct CellHash {
  std::size_t operator()(const Cell& c) const noexcept {
    return std::hash<long long>{}((static_cast<long long>(c.x) << 32) ^ static_cast<unsigned>(c.y));
  }
};

/// Per-goal action-value table keyed on the agent's cell. Unvisited entries
/// read as zero and are not stored.
class TabularQ {
 public:
  QValues q_values(const Observation& obs, std::string_view goal) const {
    return q_values(obs.position, goal);
  }

  QValues q_values(Cell cell, std::string_view goal) const {
    const auto g = tables_.find(std::string(goal));
    if (g == tables_.end()) return {};
    const auto it = g->second.find(cell);
    return it == g->second.end() ? QValues{} : it->second;
  }

  /// One Q-learning backup. Returns the TD error.
  double update(const Transition& t, double learning_rate, double discount) {
    auto& row = tables_[t.goal][t.observation.position];
    const double bootstrap =
        t.done ? 0.0 : discount * max_value(q_values(t.next_observation.position, t.goal));
    const double td = t.reward + bootstrap - row[static_cast<int>(t.action)];
    row[static_cast<int>(t.action)] += learning_rate * td;
    return td;
  }

  void set(std::string_view goal, Cell cell, const QValues& values) {
    tables_[std::string(goal)][cell] = values;
  }

  std::vector<std::string> goals() const {
    std::vector<std::string> out;
    for (const auto& [g, _] : tables_) out.push_back(g);
    return out;
  }

  std::size_t entry_count() const {
    std::size_t n = 0;
    for (const auto& [_, t] : tables_) n += t.size();
    return n;
  }

  friend bool operator==(const TabularQ& a, const TabularQ& b) { return a.tables_ == b.tables_; }

  /// `lexnav-tab v1`, then `goal x y q0 q1 q2 q3` per visited cell.
  void save(std::ostream& sink) const {
    sink << "lexnav-tab v1\n";
    char buf[40];
    for (const auto& [goal, table] : tables_) {
      std::vector<std::pair<Cell, QValues>> rows(table.begin(), table.end());
      std::sort(rows.begin(), rows.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [cell, q] : rows) {
        sink << goal << ' ' << cell.x << ' ' << cell.y;
        for (double v : q) {
          std::snprintf(buf, sizeof buf, " %.17g", v);
          sink << buf;
        }
        sink << '\n';
      }
    }
  }

  static TabularQ load(std::istream& source) {
    std::string line;
    if (!std::getline(source, line)) throw ParseError("empty tabular checkpoint");
    std::istringstream h(line);
    std::string magic, version;
    h >> magic >> version;
    if (magic != "lexnav-tab") throw ParseError("not a tabular checkpoint: '" + line + "'");
    if (version != "v1") throw ParseError("unsupported tabular checkpoint version '" + version + "'");
    TabularQ q;
    std::size_t line_no = 1;
    while (std::getline(source, line)) {
      ++line_no;
      if (detail::trim(line).empty()) continue;
      const auto tokens = detail::split_ws(line);
      const auto where = "tabular checkpoint line " + std::to_string(line_no);
      if (tokens.size() != 7) throw ParseError(where + ": expected 7 fields");
      std::array<double, 6> nums{};
      for (std::size_t k = 0; k < 6; ++k) {
        const auto v = detail::parse_double(tokens[k + 1]);
        if (!v || !std::isfinite(*v)) throw ParseError(where + ": bad number");
        nums[k] = *v;
      }
      q.set(tokens[0], Cell{static_cast<int>(nums[0]), static_cast<int>(nums[1])},
            QValues{nums[2], nums[3], nums[4], nums[5]});
    }
    return q;
  }

 private:
  std::map<std::string, std::unordered_map<Cell, QValues, CellHash>, std::less<>> tables_;
};

// ---------------------------------------------------------------------------
// Network learner

struct DenseQConfig {
  std::vector<std::size_t> hidden = {64, 64};
  double discount = 0.99;
  std::size_t sync_period = 1000;
  nn::AdamConfig adam;
};

/// Goal-conditional value network over observation features concatenated
/// with the goal vector, with a periodically synced target copy.
class DenseQ {
 public:
  DenseQ(std::size_t observation_length, GoalEncoder encoder, DenseQConfig config, Rng& rng)
      : encoder_(std::move(encoder)), config_(std::move(config)), obs_len_(observation_length) {
    auto sizes = layer_sizes();
    online_ = nn::init_net(sizes, rng);
    target_ = online_;
    opt_ = nn::OptimizerState(online_, config_.adam);
  }

  /// Wraps an existing network, e.g. a loaded checkpoint.
  DenseQ(std::size_t observation_length, GoalEncoder encoder, DenseQConfig config, nn::DenseNet net)
      : encoder_(std::move(encoder)), config_(std::move(config)), obs_len_(observation_length) {
    if (net.sizes() != layer_sizes()) throw ValidationError("network shape does not match encoder");
    online_ = std::move(net);
    target_ = online_;
    opt_ = nn::OptimizerState(online_, config_.adam);
  }

  const GoalEncoder& encoder() const { return encoder_; }
  const DenseQConfig& config() const { return config_; }
  const nn::DenseNet& online() const { return online_; }
  const nn::DenseNet& target() const { return target_; }
  nn::DenseNet& mutable_online() { return online_; }
  std::size_t observation_length() const { return obs_len_; }
  std::size_t input_length() const { return obs_len_ + encoder_.length(); }
  long updates() const { return updates_; }
  const std::vector<std::string>& trained_goals() const { return trained_goals_; }
  void set_trained_goals(std::vector<std::string> goals) { trained_goals_ = std::move(goals); }

  std::vector<double> input(const Observation& obs, std::string_view goal) const {
    if (obs.features.size() != obs_len_) throw UsageError("observation length mismatch");
    std::vector<double> x(obs.features);
    const auto& g = cached_goal(goal);
    x.insert(x.end(), g.begin(), g.end());
    return x;
  }

  QValues q_values(const Observation& obs, std::string_view goal) const {
    return to_q(nn::forward(online_, input(obs, goal)));
  }

  QValues target_q_values(const Observation& obs, std::string_view goal) const {
    return to_q(nn::forward(target_, input(obs, goal)));
  }

  void sync_target() { target_ = online_; }

  /// Mean Huber loss over the batch before the step.
  double update(std::span<const Transition* const> batch) {
    if (batch.empty()) throw UsageError("dense update on an empty batch");
    nn::Gradients grads = nn::zero_like(online_);
    const double loss = accumulate_gradients(batch, grads);
    nn::adam_step(online_, grads, opt_);
    ++updates_;
    if (config_.sync_period > 0 && updates_ % static_cast<long>(config_.sync_period) == 0) {
      sync_target();
    }
    return loss;
  }

  /// Loss and its gradient w.r.t. the online parameters, without stepping.
  double accumulate_gradients(std::span<const Transition* const> batch,
                              nn::Gradients& grads) const {
    const double scale = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    nn::ForwardTrace trace;
    std::vector<double> out_grad(kNumActions);
    for (const Transition* t : batch) {
      double target = t->reward;
      if (!t->done) target += config_.discount * max_value(target_q_values(t->next_observation, t->goal));
      nn::forward(online_, input(t->observation, t->goal), trace);
      const double pred = trace.activations.back()[static_cast<int>(t->action)];
      const auto h = nn::huber(pred, target);
      loss += h.loss * scale;
      std::fill(out_grad.begin(), out_grad.end(), 0.0);
      out_grad[static_cast<int>(t->action)] = h.gradient * scale;
      nn::backward(online_, trace, out_grad, grads);
    }
    return loss;
  }

  void save(std::ostream& sink) const {
    sink << "lexnav-dqn v1 " << goal_mode_name(encoder_.mode()) << ' ' << obs_len_ << '\n';
    sink << "vocabulary";
    for (const auto& w : encoder_.vocabulary()) sink << ' ' << w;
    sink << "\ngoals";
    for (const auto& w : trained_goals_) sink << ' ' << w;
    sink << '\n';
    nn::save_net(online_, sink);
  }

  static DenseQ load(std::istream& source, std::shared_ptr<const EmbeddingStore> store,
                     DenseQConfig config = {}) {
    std::string line;
    if (!std::getline(source, line)) throw ParseError("empty policy checkpoint");
    std::istringstream h(line);
    std::string magic, version, mode;
    std::size_t obs_len = 0;
    h >> magic >> version >> mode >> obs_len;
    if (magic != "lexnav-dqn") throw ParseError("not a network policy checkpoint: '" + line + "'");
    if (version != "v1") throw ParseError("unsupported policy checkpoint version '" + version + "'");
    auto words_after = [&](std::string_view key) {
      std::string l;
      if (!std::getline(source, l)) throw ParseError("policy checkpoint truncated");
      auto tokens = detail::split_ws(l);
      if (tokens.empty() || tokens.front() != key) {
        throw ParseError("policy checkpoint: expected '" + std::string(key) + "' line");
      }
      return std::vector<std::string>(tokens.begin() + 1, tokens.end());
    };
    auto vocab = words_after("vocabulary");
    auto goals = words_after("goals");
    GoalEncoder enc = [&] {
      if (mode == "onehot") return GoalEncoder::one_hot(vocab);
      if (mode == "embedding") {
        if (!store) throw ValidationError("embedding policy checkpoint needs an embedding store");
        return GoalEncoder::embedding(store);
      }
      throw ParseError("unknown goal mode '" + mode + "'");
    }();
    auto net = nn::load_net(source);
    DenseQ q(obs_len, std::move(enc), std::move(config), std::move(net));
    q.set_trained_goals(std::move(goals));
    return q;
  }

 private:
  std::vector<std::size_t> layer_sizes() const {
    std::vector<std::size_t> sizes{input_length()};
    sizes.insert(sizes.end(), config_.hidden.begin(), config_.hidden.end());
    sizes.push_back(kNumActions);
    return sizes;
  }

  static QValues to_q(const std::vector<double>& y) { return {y[0], y[1], y[2], y[3]}; }

  const std::vector<double>& cached_goal(std::string_view goal) const {
    auto it = goal_cache_.find(goal);
    if (it == goal_cache_.end()) {
      it = goal_cache_.emplace(std::string(goal), encoder_.encode(goal).values).first;
    }
    return it->second;
  }

  GoalEncoder encoder_;
  DenseQConfig config_;
  std::size_t obs_len_ = 0;
  nn::DenseNet online_;
  nn::DenseNet target_;
  nn::OptimizerState opt_;
  long updates_ = 0;
  std::vector<std::string> trained_goals_;
  mutable std::map<std::string, std::vector<double>, std::less<>> goal_cache_;
};

// ---------------------------------------------------------------------------
// Agent-agnostic helpers

/// Either learner kind; frozen priors are loaded as one of these.
using Agent = std::variant<TabularQ, DenseQ>;

inline QValues q_values(const Agent& agent, const Observation& obs, std::string_view goal) {
  return std::visit([&](const auto& a) { return a.q_values(obs, goal); }, agent);
}

template <typename A>
Action greedy_action(const A& agent, const Observation& obs, std::string_view goal, Rng& rng) {
  if constexpr (std::is_same_v<A, Agent>) {
    return argmax_action(q_values(agent, obs, goal), rng);
  } else {
    return argmax_action(agent.q_values(obs, goal), rng);
  }
}

inline void tabular_update(TabularQ& agent, const Transition& t, double learning_rate,
                           double discount) {
  agent.update(t, learning_rate, discount);
}

inline double dense_update(DenseQ& agent, std::span<const Transition* const> batch) {
  return agent.update(batch);
}

inline std::vector<std::string> trained_goals(const Agent& agent) {
  if (const auto* t = std::get_if<TabularQ>(&agent)) return t->goals();
  return std::get<DenseQ>(agent).trained_goals();
}

inline void save_policy(const Agent& agent, std::ostream& sink) {
  std::visit([&](const auto& a) { a.save(sink); }, agent);
}

/// Dispatches on the checkpoint header. `store` is required only for
/// embedding-mode network policies.
inline Agent load_policy(std::istream& source, std::shared_ptr<const EmbeddingStore> store = nullptr,
                         DenseQConfig config = {}) {
  std::string all((std::istreambuf_iterator<char>(source)), std::istreambuf_iterator<char>());
  std::istringstream in(all);
  if (all.rfind("lexnav-tab", 0) == 0) return TabularQ::load(in);
  if (all.rfind("lexnav-dqn", 0) == 0) return DenseQ::load(in, std::move(store), std::move(config));
  throw ParseError("unrecognised policy checkpoint header");
}

}  // namespace lexnav
