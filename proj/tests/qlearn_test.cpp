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
#include <map>
#include <sstream>

#include "gtest/gtest.h"
#include "lexnav/qlearn.hpp"
#include "test_support.hpp"

namespace lexnav {
namespace {

const std::vector<std::string> kVocab = {"shower", "toilet", "bed", "toaster"};

std::shared_ptr<const EmbeddingStore> fixture() {
  return std::make_shared<const EmbeddingStore>(testing::fixture_store());
}

Observation obs_at(int x, int y, std::size_t len = 4) {
  FeatureVector f(len, 0.0);
  f[static_cast<std::size_t>(x) % len] = 1.0;
  f[static_cast<std::size_t>(y + 1) % len] += 0.5;
  return {{x, y}, f};
}

DenseQ zero_dense(std::size_t obs_len, GoalEncoder enc) {
  std::vector<std::size_t> sizes{obs_len + enc.length(), 8, 8, kNumActions};
  return DenseQ(obs_len, std::move(enc), {{8, 8}, 0.99, 1000, {}}, nn::DenseNet(sizes));
}

TEST(EncodeGoal, OneHotAndEmbedding) {
  const auto onehot = encode_goal("bed", GoalEncoder::one_hot(kVocab));
  EXPECT_EQ(onehot.mode, GoalMode::OneHot);
  EXPECT_EQ(onehot.values, (std::vector<double>{0, 0, 1, 0}));
  const auto store = fixture();
  const auto emb = encode_goal("shower", GoalEncoder::embedding(store));
  EXPECT_EQ(emb.values, store->vector("shower").values);
  EXPECT_THROW(encode_goal("sofa", GoalEncoder::embedding(store)), LookupError);
  EXPECT_THROW(encode_goal("sofa", GoalEncoder::one_hot(kVocab)), LookupError);
  EXPECT_THROW(GoalEncoder::one_hot({"a", "a"}), ValidationError);
}

TEST(QValues, FreshAgentsAreZero) {
  TabularQ tab;
  EXPECT_EQ(tab.q_values(obs_at(1, 2), "bed"), (QValues{0, 0, 0, 0}));
  const auto dense = zero_dense(4, GoalEncoder::one_hot(kVocab));
  EXPECT_EQ(dense.q_values(obs_at(1, 2), "bed"), (QValues{0, 0, 0, 0}));
  EXPECT_EQ(dense.input(obs_at(1, 2), "bed").size(), 4u + kVocab.size());
}

TEST(QValues, OneHotAndEmbeddingAgentsDifferOnlyInGoalLength) {
  Rng rng(1);
  const auto store = fixture();
  DenseQ a(36, GoalEncoder::one_hot(kVocab), {}, rng);
  DenseQ b(36, GoalEncoder::embedding(store), {}, rng);
  EXPECT_EQ(a.input_length(), 36u + 4u);
  EXPECT_EQ(b.input_length(), 36u + 50u);
  auto sa = a.online().sizes(), sb = b.online().sizes();
  sa.erase(sa.begin());
  sb.erase(sb.begin());
  EXPECT_EQ(sa, sb);
  EXPECT_EQ(sa, (std::vector<std::size_t>{64, 64, 4}));
  const Observation o{{0, 0}, FeatureVector(36, 0.0)};
  EXPECT_EQ(a.q_values(o, "bed").size(), b.q_values(o, "bed").size());
}

TEST(GreedyAction, ArgmaxAndTies) {
  TabularQ q;
  q.set("bed", {1, 1}, {0, 1, 0, 0});
  Rng rng(2);
  EXPECT_EQ(greedy_action(q, obs_at(1, 1), "bed", rng), Action::East);

  constexpr long n = 10000;
  std::array<long, 4> counts{};
  for (long i = 0; i < n; ++i) ++counts[static_cast<int>(greedy_action(q, obs_at(5, 5), "bed", rng))];
  for (long c : counts) EXPECT_TRUE(testing::within_3_sigma(c, n, 0.25)) << c;

  Rng r1(3), r2(3);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(greedy_action(q, obs_at(5, 5), "bed", r1), greedy_action(q, obs_at(5, 5), "bed", r2));
  }
}

TEST(TabularUpdate, BackupArithmetic) {
  TabularQ q;
  const Transition terminal{obs_at(2, 1), "shower", Action::North, 10.99, obs_at(2, 0), true};
  tabular_update(q, terminal, 1.0, 0.99);
  EXPECT_DOUBLE_EQ(q.q_values(obs_at(2, 1), "shower")[0], 10.99);

  TabularQ frozen;
  frozen.set("shower", {3, 3}, {1, 2, 3, 4});
  tabular_update(frozen, {obs_at(3, 3), "shower", Action::West, 5.0, obs_at(2, 3), false}, 0.0, 0.99);
  EXPECT_EQ(frozen.q_values(obs_at(3, 3), "shower"), (QValues{1, 2, 3, 4}));

  TabularQ boot;
  boot.set("g", {1, 0}, {0, 2.0, 0, 0});
  tabular_update(boot, {obs_at(0, 0), "g", Action::East, 1.0, obs_at(1, 0), false}, 0.5, 0.9);
  EXPECT_DOUBLE_EQ(boot.q_values(obs_at(0, 0), "g")[1], 0.5 * (1.0 + 0.9 * 2.0));
}

// Three-cell chain: East/West move, North/South stay. Entering cell 2 pays
// 10 and terminates; every other move pays -0.01.
struct Chain {
  static constexpr int kCells = 3;
  static std::pair<int, bool> next(int s, int a) {
    if (a == 1) return {s + 1, s + 1 == 2};
    if (a == 3) return {std::max(s - 1, 0), false};
    return {s, false};
  }
  static double reward(int s, int a) { return next(s, a).second ? 10.0 : -0.01; }
};

TEST(TabularUpdate, ConvergesToValueIteration) {
  constexpr double gamma = 0.9;
  // Value-iteration oracle on the chain's own tables.
  std::array<std::array<double, 4>, 2> vi{};
  for (int sweep = 0; sweep < 2000; ++sweep) {
    auto copy = vi;
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 4; ++a) {
        const auto [n, done] = Chain::next(s, a);
        const double boot = done ? 0.0 : gamma * *std::max_element(copy[n].begin(), copy[n].end());
        vi[s][a] = Chain::reward(s, a) + boot;
      }
    }
  }
  TabularQ q;
  for (int sweep = 0; sweep < 3000; ++sweep) {
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 4; ++a) {
        const auto [n, done] = Chain::next(s, a);
        tabular_update(q, {obs_at(s, 0), "g", static_cast<Action>(a), Chain::reward(s, a), obs_at(n, 0), done}, 0.1,
                       gamma);
      }
    }
  }
  for (int s = 0; s < 2; ++s) {
    const auto values = q.q_values(obs_at(s, 0), "g");
    for (int a = 0; a < 4; ++a) EXPECT_NEAR(values[a], vi[s][a], 1e-6) << s << "," << a;
  }
}

TEST(ReplayBuffer, FifoEvictionAndCapacity) {
  ReplayBuffer buf(5);
  for (int i = 0; i < 6; ++i) {
    buf.push({obs_at(i, 0), "g", Action::North, static_cast<double>(i), obs_at(i, 0), false});
    EXPECT_LE(buf.size(), buf.capacity());
  }
  EXPECT_EQ(buf.size(), 5u);
  for (std::size_t k = 0; k < buf.size(); ++k) EXPECT_EQ(buf.at(k).reward, static_cast<double>(k + 1));
  Rng rng(4);
  for (const auto* t : buf.sample(1000, rng)) EXPECT_NE(t->reward, 0.0);
  EXPECT_THROW(ReplayBuffer(0), ValidationError);
}

TEST(ReplayBuffer, SizeNeverExceedsCapacity) {
  ReplayBuffer buf(37);
  for (int i = 0; i < 500; ++i) {
    buf.push({obs_at(0, 0), "g", Action::North, 0.0, obs_at(0, 0), false});
    ASSERT_LE(buf.size(), 37u);
  }
}

TEST(ReplayBuffer, Sampling) {
  ReplayBuffer one(4);
  one.push({obs_at(0, 0), "g", Action::South, 7.0, obs_at(0, 0), true});
  Rng rng(5);
  for (const auto* t : one.sample(20, rng)) EXPECT_EQ(t->reward, 7.0);

  ReplayBuffer ten(10);
  for (int i = 0; i < 10; ++i) ten.push({obs_at(0, 0), "g", Action::North, static_cast<double>(i), obs_at(0, 0), false});
  constexpr long n = 100000;
  std::array<long, 10> counts{};
  for (const auto* t : ten.sample(n, rng)) ++counts[static_cast<int>(t->reward)];
  for (long c : counts) EXPECT_TRUE(testing::within_3_sigma(c, n, 0.1)) << c;
  ReplayBuffer empty(3);
  EXPECT_THROW(empty.sample(1, rng), UsageError);
}

TEST(DenseUpdate, ExactTargetsGiveZeroLossAndNoChange) {
  auto q = zero_dense(4, GoalEncoder::one_hot(kVocab));
  const auto before = q.online();
  std::vector<Transition> batch;
  for (int i = 0; i < 8; ++i) batch.push_back({obs_at(i, 1), "bed", Action::East, 0.0, obs_at(i + 1, 1), i % 2 == 0});
  std::vector<const Transition*> ptrs;
  for (const auto& t : batch) ptrs.push_back(&t);
  EXPECT_EQ(dense_update(q, ptrs), 0.0);
  EXPECT_EQ(q.online(), before);
}

TEST(DenseUpdate, TargetSync) {
  Rng rng(6);
  DenseQConfig cfg;
  cfg.hidden = {8};
  cfg.sync_period = 3;
  DenseQ q(4, GoalEncoder::one_hot(kVocab), cfg, rng);
  std::vector<Transition> batch = {{obs_at(0, 0), "bed", Action::North, 1.0, obs_at(1, 0), false},
                                   {obs_at(1, 0), "toilet", Action::West, -1.0, obs_at(0, 0), true}};
  std::vector<const Transition*> ptrs{&batch[0], &batch[1]};
  dense_update(q, ptrs);
  dense_update(q, ptrs);
  EXPECT_FALSE(q.online() == q.target());
  dense_update(q, ptrs);
  EXPECT_EQ(q.online(), q.target());
  for (const auto& t : batch) EXPECT_EQ(q.q_values(t.observation, t.goal), q.target_q_values(t.observation, t.goal));
}

TEST(DenseUpdate, LossGradientMatchesFiniteDifferences) {
  Rng rng(7);
  DenseQConfig cfg;
  cfg.hidden = {5, 4};
  cfg.discount = 0.9;
  DenseQ q(4, GoalEncoder::one_hot(kVocab), cfg, rng);
  // Perturb biases so the target net differs from the online net.
  for (auto& l : q.mutable_online().layers()) {
    for (auto& b : l.b) b = uniform_real(rng, -0.2, 0.2);
  }
  std::vector<Transition> batch;
  for (int i = 0; i < 6; ++i) {
    batch.push_back({obs_at(i, i % 3), kVocab[i % 4], static_cast<Action>(i % 4), uniform_real(rng, -2, 3),
                     obs_at(i + 1, 0), i == 5});
  }
  std::vector<const Transition*> ptrs;
  for (const auto& t : batch) ptrs.push_back(&t);

  nn::Gradients analytic = nn::zero_like(q.online());
  q.accumulate_gradients(ptrs, analytic);
  constexpr double h = 1e-5;
  auto loss = [&] {
    nn::Gradients scratch = nn::zero_like(q.online());
    return q.accumulate_gradients(ptrs, scratch);
  };
  for (std::size_t k = 0; k < analytic.layers().size(); ++k) {
    auto check = [&](std::vector<double>& params, const std::vector<double>& grad) {
      for (std::size_t j = 0; j < params.size(); ++j) {
        const double saved = params[j];
        params[j] = saved + h;
        const double up = loss();
        params[j] = saved - h;
        const double down = loss();
        params[j] = saved;
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max({std::abs(numeric), std::abs(grad[j]), 1e-6});
        EXPECT_LT(std::abs(numeric - grad[j]) / scale, 1e-4) << "layer " << k << " param " << j;
      }
    };
    check(q.mutable_online().layers()[k].w, analytic.layers()[k].w);
    check(q.mutable_online().layers()[k].b, analytic.layers()[k].b);
  }
}

TEST(Checkpoint, TabularRoundTripAndSparsity) {
  TabularQ q;
  tabular_update(q, {obs_at(2, 1), "shower", Action::North, 10.99, obs_at(2, 0), true}, 1.0, 0.99);
  tabular_update(q, {obs_at(5, 8), "bed", Action::East, 0.99, obs_at(6, 8), false}, 0.1, 0.99);
  q.set("bed", {7, 7}, {0.1, -1e-300, 3.0000000000000004, -2.5});
  std::stringstream ss;
  save_policy(Agent{q}, ss);
  const std::string text = ss.str();
  EXPECT_EQ(text.rfind("lexnav-tab v1\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);  // header + 3 visited cells
  const Agent loaded = load_policy(ss);
  ASSERT_TRUE(std::holds_alternative<TabularQ>(loaded));
  EXPECT_EQ(std::get<TabularQ>(loaded), q);
  std::istringstream bad("lexnav-tab v9\n");
  EXPECT_THROW(load_policy(bad), ParseError);
}

TEST(Checkpoint, DenseRoundTrip) {
  Rng rng(8);
  const auto store = fixture();
  for (GoalMode mode : {GoalMode::OneHot, GoalMode::Embedding}) {
    DenseQ q(36, mode == GoalMode::OneHot ? GoalEncoder::one_hot(kVocab) : GoalEncoder::embedding(store), {}, rng);
    q.set_trained_goals({"bed", "toilet"});
    std::stringstream ss;
    save_policy(Agent{q}, ss);
    const Agent loaded = load_policy(ss, store);
    ASSERT_TRUE(std::holds_alternative<DenseQ>(loaded));
    EXPECT_EQ(trained_goals(loaded), (std::vector<std::string>{"bed", "toilet"}));
    for (int i = 0; i < 20; ++i) {
      FeatureVector f(36, 0.0);
      f[uniform_index(rng, 25)] = 1.0;
      f[25 + uniform_index(rng, 11)] = 1.0;
      const Observation o{{0, 0}, f};
      const auto goal = kVocab[uniform_index(rng, kVocab.size())];
      const auto a = q.q_values(o, goal), b = q_values(loaded, o, goal);
      for (int k = 0; k < 4; ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
    }
  }
  std::istringstream bad("lexnav-dqn v2 onehot 36\n");
  EXPECT_THROW(load_policy(bad), ParseError);
  std::istringstream unknown("something else\n");
  EXPECT_THROW(load_policy(unknown), ParseError);
}

}  // namespace
}  // namespace lexnav
