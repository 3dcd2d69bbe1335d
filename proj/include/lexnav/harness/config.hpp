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

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lexnav/embedding.hpp"
#include "lexnav/error.hpp"
#include "lexnav/gridworld.hpp"
#include "lexnav/transfer.hpp"

namespace lexnav::harness {

/// Flat `key = value` text with dotted keys and `#` comments.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text) {
    KeyValueFile kv;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto body = detail::trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      const auto where = "config line " + std::to_string(line_no);
      if (eq == std::string_view::npos) throw ParseError(where + ": expected 'key = value'");
      const std::string key(detail::trim(body.substr(0, eq)));
      const std::string value(detail::trim(body.substr(eq + 1)));
      if (key.empty()) throw ParseError(where + ": empty key");
      if (!kv.values_.emplace(key, value).second) throw ParseError(where + ": duplicate key '" + key + "'");
    }
    return kv;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

 private:
  std::map<std::string, std::string> values_;
};

enum class AgentKind { Tabular, DenseOneHot, DenseEmbedding };

inline const char* agent_kind_name(AgentKind k) {
  switch (k) {
    case AgentKind::Tabular: return "tabular";
    case AgentKind::DenseOneHot: return "dense-onehot";
    case AgentKind::DenseEmbedding: return "dense-embedding";
  }
  return "?";
}

struct LearnerConfig {
  double discount = 0.99;
  double tabular_lr = 0.1;
  double adam_lr = 1e-3;
  std::size_t batch = 32;
  std::size_t sync_period = 1000;
  std::size_t warmup = 1000;
  std::size_t replay_capacity = 50000;
  std::size_t train_every = 1;
  std::vector<std::size_t> hidden = {64, 64};
};

struct TransferConfig {
  std::string checkpoint;             // frozen prior policy
  std::string prior = "auto";         // word or "auto"
  std::string target;                 // new goal
  std::vector<std::string> mastered;  // empty: goals stored in the checkpoint
};

struct RunConfig {
  std::string map_path;  // empty: built-in apartment
  std::vector<std::string> goals;
  AgentKind agent = AgentKind::Tabular;
  std::string embeddings_path;
  ExplorationSchedule schedule;
  TransferConfig transfer;
  long max_env_steps = 400000;
  double criterion_rate = 0.95;
  std::size_t criterion_window = 100;
  std::uint64_t seed = 0;
  long log_period = 5000;
  LearnerConfig learner;
  RewardConfig reward;

  /// Checks everything that does not need the map or vector file.
  void validate() const {
    schedule.validate();
    if (goals.empty() && transfer.target.empty()) throw ValidationError("no goals configured");
    if (max_env_steps < 0) throw ValidationError("budget.max_env_steps must be >= 0");
    if (!(criterion_rate >= 0.0 && criterion_rate <= 1.0)) throw ValidationError("criterion.rate outside [0,1]");
    if (criterion_window == 0) throw ValidationError("criterion.window must be positive");
    if (log_period <= 0) throw ValidationError("log.period must be positive");
    if (!(learner.discount >= 0.0 && learner.discount <= 1.0)) throw ValidationError("learner.gamma outside [0,1]");
    if (!(learner.tabular_lr >= 0.0 && learner.tabular_lr <= 1.0)) throw ValidationError("learner.lr outside [0,1]");
    if (learner.batch == 0 || learner.replay_capacity == 0 || learner.train_every == 0) {
      throw ValidationError("learner batch, replay capacity and train_every must be positive");
    }
    if (reward.max_steps <= 0) throw ValidationError("reward.max_steps must be positive");
    if (!transfer.target.empty()) {
      for (const auto& m : transfer.mastered) {
        if (m == transfer.target) throw ValidationError("transfer target '" + m + "' is in the mastered set");
      }
      if (transfer.prior == transfer.target) throw ValidationError("prior equals transfer target");
    }
  }
};

namespace detail {

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto item = lexnav::detail::trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  const auto d = lexnav::detail::parse_double(v);
  if (!d || !std::isfinite(*d)) throw ValidationError("config key '" + key + "': not a number: '" + v + "'");
  return *d;
}

inline long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ValidationError("config key '" + key + "': not an integer: '" + v + "'");
  }
  return out;
}

inline std::size_t to_size(const std::string& key, const std::string& v) {
  const long n = to_long(key, v);
  if (n < 0) throw ValidationError("config key '" + key + "' must be non-negative");
  return static_cast<std::size_t>(n);
}

}  // namespace detail

inline AgentKind parse_agent_kind(const std::string& v) {
  if (v == "tabular") return AgentKind::Tabular;
  if (v == "dense-onehot") return AgentKind::DenseOneHot;
  if (v == "dense-embedding") return AgentKind::DenseEmbedding;
  throw ValidationError("unknown agent kind '" + v + "' (tabular|dense-onehot|dense-embedding)");
}

/// Builds a RunConfig from parsed keys. Relative paths are resolved
/// against `base_dir`. Unknown keys are rejected.
inline RunConfig config_from_keys(const KeyValueFile& kv, const std::filesystem::path& base_dir = {}) {
  RunConfig c;
  auto path = [&](const std::string& v) {
    if (v.empty()) return v;
    std::filesystem::path p(v);
    return (p.is_absolute() || base_dir.empty() ? p : base_dir / p).string();
  };
  for (const auto& [key, v] : kv.values()) {
    using namespace detail;
    if (key == "map") c.map_path = path(v);
    else if (key == "goals") c.goals = split_list(v);
    else if (key == "agent") c.agent = parse_agent_kind(v);
    else if (key == "embeddings") c.embeddings_path = path(v);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_size(key, v));
    else if (key == "schedule.epsilon_start") c.schedule.epsilon_start = to_double(key, v);
    else if (key == "schedule.epsilon_end") c.schedule.epsilon_end = to_double(key, v);
    else if (key == "schedule.decay_steps") c.schedule.decay_steps = to_long(key, v);
    else if (key == "schedule.alpha") c.schedule.alpha = to_double(key, v);
    else if (key == "transfer.checkpoint") c.transfer.checkpoint = path(v);
    else if (key == "transfer.prior") c.transfer.prior = v;
    else if (key == "transfer.target") c.transfer.target = v;
    else if (key == "transfer.mastered") c.transfer.mastered = split_list(v);
    else if (key == "budget.max_env_steps") c.max_env_steps = to_long(key, v);
    else if (key == "criterion.rate") c.criterion_rate = to_double(key, v);
    else if (key == "criterion.window") c.criterion_window = to_size(key, v);
    else if (key == "log.period") c.log_period = to_long(key, v);
    else if (key == "learner.gamma") c.learner.discount = to_double(key, v);
    else if (key == "learner.lr") c.learner.tabular_lr = to_double(key, v);
    else if (key == "learner.adam_lr") c.learner.adam_lr = to_double(key, v);
    else if (key == "learner.batch") c.learner.batch = to_size(key, v);
    else if (key == "learner.sync") c.learner.sync_period = to_size(key, v);
    else if (key == "learner.warmup") c.learner.warmup = to_size(key, v);
    else if (key == "learner.replay_capacity") c.learner.replay_capacity = to_size(key, v);
    else if (key == "learner.train_every") c.learner.train_every = to_size(key, v);
    else if (key == "learner.hidden") {
      c.learner.hidden.clear();
      for (const auto& s : split_list(v)) c.learner.hidden.push_back(to_size(key, s));
    }
    else if (key == "reward.distance_scale") c.reward.distance_scale = to_double(key, v);
    else if (key == "reward.slack") c.reward.slack = to_double(key, v);
    else if (key == "reward.bonus") c.reward.goal_bonus = to_double(key, v);
    else if (key == "reward.max_steps") c.reward.max_steps = static_cast<int>(to_long(key, v));
    else throw ValidationError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

inline std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RunConfig load_config(const std::filesystem::path& file) {
  return config_from_keys(KeyValueFile::parse(read_text_file(file)), file.parent_path());
}

/// Map and vector file loaded once and shared read-only between runs.
struct Resources {
  std::shared_ptr<const ApartmentMap> map;
  std::shared_ptr<const EmbeddingStore> store;  // may be null
};

inline Resources load_resources(const RunConfig& c) {
  Resources r;
  r.map = std::make_shared<const ApartmentMap>(
      parse_map(c.map_path.empty() ? std::string(kDefaultMap) : read_text_file(c.map_path)));
  if (!c.embeddings_path.empty()) {
    std::ifstream in(c.embeddings_path);
    if (!in) throw ValidationError("cannot open embeddings '" + c.embeddings_path + "'");
    r.store = std::make_shared<const EmbeddingStore>(load_embeddings(in));
  }
  return r;
}

}  // namespace lexnav::harness
