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

#include <cmath>
#include <cstring>

#include "gtest/gtest.h"
#include "lexnav/transfer.hpp"
#include "test_support.hpp"

namespace lexnav {
namespace {

const Observation kObs{{4, 4}, {}};

// Current learner prefers East everywhere; the prior prefers South.
struct Fixture {
  TabularQ learner;
  PriorPolicy prior;
  Fixture() {
    learner.set("bathtub", kObs.position, {0, 1, 0, 0});
    TabularQ frozen;
    frozen.set("shower", kObs.position, {0, 0, 2, 0});
    prior = {"shower", std::make_shared<const Agent>(std::move(frozen))};
  }
};

struct Counts {
  std::array<long, 3> source{};
  std::array<long, 4> action{};
};

Counts draw(const Fixture& f, const PriorPolicy* prior, double eps, double alpha, long n, std::uint64_t seed) {
  Rng rng(seed);
  Counts c;
  for (long i = 0; i < n; ++i) {
    const auto d = explore_action(f.learner, kObs, "bathtub", prior, eps, alpha, rng);
    ++c.source[static_cast<int>(d.source)];
    ++c.action[static_cast<int>(d.action)];
  }
  return c;
}

TEST(Schedule, LinearDecay) {
  const ExplorationSchedule s;
  EXPECT_DOUBLE_EQ(epsilon_at(s, 0), 1.0);
  EXPECT_DOUBLE_EQ(epsilon_at(s, 75000), 0.505);
  EXPECT_DOUBLE_EQ(epsilon_at(s, 150000), 0.01);
  EXPECT_DOUBLE_EQ(epsilon_at(s, 1000000), 0.01);
  double last = 2.0;
  for (long t = 0; t <= 200000; t += 997) {
    const double e = epsilon_at(s, t);
    EXPECT_LE(e, last);
    last = e;
  }
  ExplorationSchedule bad;
  bad.alpha = 1.5;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(SelectPrior, MatchesNearestPrior) {
  const auto store = testing::fixture_store();
  const std::vector<std::string> mastered = {"shower", "toilet", "bed", "toaster"};
  EXPECT_EQ(select_prior(store, "bathtub", mastered).word, "shower");
  for (const auto& target : std::vector<std::string>{"bathtub", "stove", "table", "wardrobe"}) {
    const auto a = select_prior(store, target, mastered);
    const auto b = nearest_prior(store, target, mastered);
    EXPECT_EQ(a.word, b.word);
    EXPECT_EQ(a.score, b.score);
  }
}

TEST(ExploreAction, ZeroEpsilonIsGreedy) {
  Fixture f;
  const auto c = draw(f, &f.prior, 0.0, 0.7, 5000, 1);
  EXPECT_EQ(c.source[0], 5000);
  EXPECT_EQ(c.action[1], 5000);
}

TEST(ExploreAction, FullEpsilonSplitsPriorAndRandom) {
  Fixture f;
  constexpr long n = 100000;
  const auto c = draw(f, &f.prior, 1.0, 0.2, n, 2);
  EXPECT_EQ(c.source[0], 0);
  EXPECT_TRUE(testing::within_3_sigma(c.source[1], n, 0.2)) << c.source[1];
  EXPECT_TRUE(testing::within_3_sigma(c.source[2], n, 0.8)) << c.source[2];
  // South comes from the prior branch plus a quarter of the random branch.
  EXPECT_TRUE(testing::within_3_sigma(c.action[2], n, 0.2 + 0.8 * 0.25)) << c.action[2];
  EXPECT_TRUE(testing::within_3_sigma(c.action[0], n, 0.2)) << c.action[0];
}

TEST(ExploreAction, BranchFrequencies) {
  Fixture f;
  constexpr long n = 100000;
  const auto c = draw(f, &f.prior, 0.5, 0.2, n, 3);
  EXPECT_TRUE(testing::within_3_sigma(c.source[0], n, 0.5)) << c.source[0];
  EXPECT_TRUE(testing::within_3_sigma(c.source[1], n, 0.1)) << c.source[1];
  EXPECT_TRUE(testing::within_3_sigma(c.source[2], n, 0.4)) << c.source[2];
}

TEST(ExploreAction, ZeroAlphaIsEpsilonGreedy) {
  Fixture f;
  constexpr long n = 100000;
  const auto with_prior = draw(f, &f.prior, 0.3, 0.0, n, 4);
  const auto without = draw(f, nullptr, 0.3, 0.0, n, 4);
  EXPECT_EQ(with_prior.source[1], 0);
  EXPECT_EQ(with_prior.action, without.action);
  EXPECT_TRUE(testing::within_3_sigma(without.action[1], n, 0.7 + 0.3 * 0.25));
  // Without a prior, alpha is ignored.
  const auto ignored = draw(f, nullptr, 0.3, 0.9, n, 4);
  EXPECT_EQ(ignored.action, without.action);
}

TEST(ExploreAction, ProbabilitiesSumToOne) {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double e = uniform01(rng), a = uniform01(rng);
    const auto p = branch_probabilities(e, a, true);
    EXPECT_NEAR(p.greedy + p.prior + p.random, 1.0, 1e-15);
    EXPECT_GE(p.prior, 0.0);
    EXPECT_GE(p.random, 0.0);
  }
}

TEST(ExploreAction, RejectsOutOfRange) {
  Fixture f;
  Rng rng(6);
  EXPECT_THROW(explore_action(f.learner, kObs, "bathtub", &f.prior, 1.1, 0.2, rng), ValidationError);
  EXPECT_THROW(explore_action(f.learner, kObs, "bathtub", &f.prior, -0.1, 0.2, rng), ValidationError);
  EXPECT_THROW(explore_action(f.learner, kObs, "bathtub", &f.prior, 0.5, 1.2, rng), ValidationError);
  EXPECT_THROW(explore_action(f.learner, kObs, "bathtub", &f.prior, 0.5, std::nan(""), rng), ValidationError);
}

TEST(ExploreAction, PriorIsNeverModified) {
  Fixture f;
  std::stringstream before, after;
  save_policy(*f.prior.policy, before);
  draw(f, &f.prior, 1.0, 1.0, 10000, 7);
  save_policy(*f.prior.policy, after);
  EXPECT_EQ(before.str(), after.str());
}

TEST(ExploreAction, PriorChoiceIsScaleInvariant) {
  const auto store = testing::fixture_store();
  const std::vector<std::string> mastered = {"shower", "toilet", "bed", "toaster"};
  for (double c : {0.001, 3.0, 1e4}) {
    const auto scaled = store.scaled(c);
    for (const auto& target : std::vector<std::string>{"bathtub", "table", "stove"}) {
      EXPECT_EQ(select_prior(scaled, target, mastered).word, select_prior(store, target, mastered).word);
    }
  }
}

TEST(ExploreAction, DenseAgentsWork) {
  Rng rng(8);
  auto store = std::make_shared<const EmbeddingStore>(testing::fixture_store());
  DenseQConfig cfg;
  cfg.hidden = {8};
  const DenseQ learner(36, GoalEncoder::embedding(store), cfg, rng);
  const Observation o{{1, 1}, FeatureVector(36, 0.0)};
  const PriorPolicy prior{"shower", std::make_shared<const Agent>(DenseQ(36, GoalEncoder::embedding(store), cfg, rng))};
  for (int i = 0; i < 100; ++i) {
    const auto d = explore_action(learner, o, "bathtub", &prior, 0.5, 0.5, rng);
    EXPECT_GE(static_cast<int>(d.action), 0);
    EXPECT_LT(static_cast<int>(d.action), kNumActions);
  }
}

}  // namespace
}  // namespace lexnav
