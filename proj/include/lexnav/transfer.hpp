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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "lexnav/embedding.hpp"
#include "lexnav/error.hpp"
#include "lexnav/qlearn.hpp"
#include "lexnav/rng.hpp"

namespace lexnav {

/// Linear epsilon decay plus the prior sampling rate.
struct ExplorationSchedule {
  double epsilon_start = 1.0;
  double epsilon_end = 0.01;
  long decay_steps = 150000;
  double alpha = 0.0;

  void validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(epsilon_start) || !unit(epsilon_end)) throw ValidationError("epsilon outside [0,1]");
    if (epsilon_start < epsilon_end) throw ValidationError("epsilon_start < epsilon_end");
    if (decay_steps <= 0) throw ValidationError("decay_steps must be positive");
    if (!unit(alpha)) throw ValidationError("alpha outside [0,1]");
  }
};

inline double epsilon_at(const ExplorationSchedule& s, long step) {
  if (step >= s.decay_steps) return s.epsilon_end;
  const double frac = static_cast<double>(std::max(step, 0L)) / static_cast<double>(s.decay_steps);
  return s.epsilon_start - (s.epsilon_start - s.epsilon_end) * frac;
}

/// A frozen, previously trained policy queried with a mastered goal.
struct PriorPolicy {
  std::string goal;
  std::shared_ptr<const Agent> policy;
};

/// Picks the mastered goal closest to `target` in embedding space.
inline SimilarityEntry select_prior(const EmbeddingStore& store, std::string_view target,
                                    std::span<const std::string> mastered) {
  return nearest_prior(store, target, mastered);
}

enum class DecisionSource { Greedy = 0, Prior = 1, Random = 2 };

inline const char* source_name(DecisionSource s) {
  static constexpr const char* names[] = {"greedy", "prior", "random"};
  return names[static_cast<int>(s)];
}

struct ActionDecision {
  Action action;
  DecisionSource source;
};

struct BranchProbabilities {
  double greedy;
  double prior;
  double random;
};

/// (1 - eps, eps * alpha, eps * (1 - alpha)); alpha counts as 0 without a prior.
inline BranchProbabilities branch_probabilities(double epsilon, double alpha, bool has_prior) {
  const double a = has_prior ? alpha : 0.0;
  return {1.0 - epsilon, epsilon * a, epsilon - epsilon * a};
}

/// Three-way exploration: greedy on the current goal, the prior policy's
/// greedy action for its own goal, or a uniformly random action. One
/// uniform draw picks the branch over [0,1-eps), [1-eps,1-eps+eps*alpha),
/// [1-eps+eps*alpha,1).
template <typename A>
ActionDecision explore_action(const A& agent, const Observation& obs, std::string_view goal,
                              const PriorPolicy* prior, double epsilon, double alpha, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon outside [0,1]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha outside [0,1]");
  const auto p = branch_probabilities(epsilon, alpha, prior != nullptr);
  const double u = uniform01(rng);
  if (u < p.greedy) return {greedy_action(agent, obs, goal, rng), DecisionSource::Greedy};
  if (u < p.greedy + p.prior) {
    return {greedy_action(*prior->policy, obs, prior->goal, rng), DecisionSource::Prior};
  }
  return {static_cast<Action>(uniform_index(rng, kNumActions)), DecisionSource::Random};
}

}  // namespace lexnav
