// Copyright 2026 The nscsg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nscsg/benchmarks.hpp"

#include <array>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "nscsg/gbi.hpp"
#include "nscsg/unfold.hpp"

namespace nscsg {
namespace {

JointAction ByLabel(const NsCsg& m, const std::string& a, const std::string& b) {
  return JointAction{{m.ActionIndex(0, a), m.ActionIndex(1, b)}};
}

TEST(CounterexampleTest, FourStageOneNodes) {
  GameInstance c = build_counterexample({-10});
  GameGraph g = unfold_tree(c.model, c.initial, c.horizon);
  std::set<int> ids;
  for (int id : g.stages[1]) ids.insert(CounterexampleNodeId(g.nodes[id].state));
  EXPECT_EQ(ids, (std::set<int>{2, 3, 4, 5}));
}

TEST(CounterexampleTest, PathPayoffs) {
  const double phi = -10;
  GameInstance c = build_counterexample({phi});
  const NsCsg& m = c.model;
  Path p{0, {c.initial}, {}};
  auto step = [&](const JointAction& a) {
    p.actions.push_back(a);
    p.states.push_back(m.successors(p.states.back(), a).at(0).state);
  };
  step(ByLabel(m, "D", "L"));
  step(ByLabel(m, "D", "R"));
  EXPECT_EQ(CounterexampleNodeId(p.states.back()), 9);
  EXPECT_EQ(path_value(m, c.rewards, p, 2), (RealVec{5, 2}));

  Path q{0, {c.initial}, {}};
  p = q;
  step(ByLabel(m, "U", "L"));
  step(JointAction{{kIdle, kIdle}});
  EXPECT_EQ(CounterexampleNodeId(p.states.back()), 10);
  EXPECT_EQ(path_value(m, c.rewards, p, 2), (RealVec{1, 1 + phi}));
}

TEST(CounterexampleTest, NodeFourStageGame) {
  GameInstance c = build_counterexample({-10});
  GameGraph g = unfold_tree(c.model, c.initial, c.horizon);
  RewardTable t = BuildRewardTable(c.model, g, c.rewards);
  std::vector<Payoff> leaf(g.size(), {0, 0});
  for (int id = 0; id < g.size(); ++id) {
    if (g.nodes[id].is_leaf()) leaf[id] = {t.state[id][0], t.state[id][1]};
  }
  for (int id : g.stages[1]) {
    if (CounterexampleNodeId(g.nodes[id].state) != 4) continue;
    BimatrixGame game = InducedGame(g, t, leaf, id);
    ASSERT_EQ(game.rows, 2);
    ASSERT_EQ(game.cols, 2);
    EXPECT_EQ(game.p1, (std::vector<double>{0, 0, 0, 5}));
    EXPECT_EQ(game.p2, (std::vector<double>{8, 0, 0, 2}));
  }
}

TEST(ParkingTest, ActionSets) {
  EXPECT_EQ(ParkingActionLabels(1).size(), 12u);
  EXPECT_EQ(ParkingActionLabels(2).size(), 4u);
  const std::vector<std::string> labels = ParkingActionLabels(1);
  std::set<std::string> v1(labels.begin(), labels.end());
  EXPECT_EQ(v1.size(), 12u);
  for (const char* banned : {"UD", "DU", "LR", "RL"}) EXPECT_EQ(v1.count(banned), 0u);
  GameInstance p = build_parking({});
  EXPECT_EQ(p.model.agent(0).actions.size(), 12u);
  EXPECT_EQ(p.model.agent(1).actions.size(), 4u);
}

TEST(ParkingTest, StateRewards) {
  ParkingParams params;
  params.reward_structure = 2;
  params.horizon = 6;
  GameInstance p = build_parking(params);
  GlobalState s = p.initial;
  const StageInfo early{1, 6}, late{2, 6};
  s.env = {3, 3, 3, 3};
  EXPECT_EQ(EvalStateReward(p.rewards[0], s, early), -20);
  EXPECT_EQ(EvalStateReward(p.rewards[1], s, early), -20);
  s.env = {2, 4, 1, 2};  // vehicle 1 parked, vehicle 2 on the bonus cell
  EXPECT_EQ(EvalStateReward(p.rewards[0], s, early), 0);
  EXPECT_EQ(EvalStateReward(p.rewards[1], s, early), 4.5);
  EXPECT_EQ(EvalStateReward(p.rewards[1], s, late), -1);

  params.reward_structure = 1;
  GameInstance q = build_parking(params);
  EXPECT_EQ(EvalStateReward(q.rewards[1], s, early), -1);
}

TEST(ParkingTest, ReachableStatesStayOnTheGrid) {
  ParkingParams params;
  params.horizon = 5;
  GameInstance p = build_parking(params);
  GameGraph g = unfold_regions(p.model, p.initial, p.horizon);
  for (const GameNode& n : g.nodes) {
    for (int v = 0; v < 2; ++v) {
      const Cell c = {int(n.state.env[2 * v]), int(n.state.env[2 * v + 1])};
      EXPECT_GE(c[0], 1);
      EXPECT_LE(c[0], params.columns);
      EXPECT_GE(c[1], 1);
      EXPECT_LE(c[1], params.rows);
      EXPECT_EQ(std::count(params.red.begin(), params.red.end(), c), 0);
    }
  }
}

TEST(ParkingTest, TrafficRulesRespected) {
  ParkingParams params;
  params.horizon = 4;
  GameInstance p = build_parking(params);
  GameGraph g = unfold_regions(p.model, p.initial, p.horizon);
  for (const GameNode& n : g.nodes) {
    for (int v = 0; v < 2; ++v) {
      Cell c = {int(n.state.env[2 * v]), int(n.state.env[2 * v + 1])};
      if (n.actions.empty()) continue;
      for (int a : n.actions[v]) {
        if (a == kIdle) continue;
        Cell at = c;
        for (char d : p.model.ActionLabel(v, a)) {
          EXPECT_EQ(params.forbidden.count({at, d}), 0u)
              << "vehicle " << v + 1 << " moves " << d << " at (" << at[0] << "," << at[1] << ")";
          Cell step = Displacement(d);
          at = {at[0] + step[0], at[1] + step[1]};
        }
      }
    }
  }
}

TEST(ParkingTest, InvalidCellsRejected) {
  ParkingParams params;
  params.start1 = {1, 1};  // red
  EXPECT_THROW(build_parking(params), Error);
  params = {};
  params.slots = {{9, 9}};
  EXPECT_THROW(build_parking(params), Error);
}

TEST(VcasTest, AdvisoryTable) {
  EXPECT_EQ(advisory_actions(1), (std::vector<double>{-3, 0, 3}));
  EXPECT_EQ(advisory_actions(2), (std::vector<double>{-9.33, -7.33, 0}));
  EXPECT_EQ(advisory_actions(9), (std::vector<double>{0, 9.7, 11.7}));
  EXPECT_THROW(advisory_actions(0), Error);
  EXPECT_THROW(advisory_actions(10), Error);
}

TEST(VcasTest, TrustUpdateCases) {
  using Dist = std::vector<std::pair<int, double>>;
  auto sorted = [](Dist d) {
    std::sort(d.begin(), d.end());
    return d;
  };
  EXPECT_EQ(sorted(trust_update(3, true, 0.1)), sorted(Dist{{4, 0.9}, {3, 0.1}}));
  EXPECT_EQ(trust_update(4, true, 0.3), (Dist{{4, 1.0}}));
  EXPECT_EQ(sorted(trust_update(2, false, 0.2)), sorted(Dist{{1, 0.8}, {2, 0.2}}));
  EXPECT_EQ(trust_update(1, false, 0.5), (Dist{{1, 1.0}}));
}

TEST(VcasTest, DynamicsExample) {
  auto s = vcas_dynamics({50, -5, 5, 3}, -9.33, 3);
  EXPECT_NEAR(s[0], 66.165, 1e-9);
  EXPECT_NEAR(s[1], -14.33, 1e-12);
  EXPECT_NEAR(s[2], 8, 1e-12);
  EXPECT_NEAR(s[3], 2, 1e-12);
  auto still = vcas_dynamics({120, 7, 7, 5}, 0, 0);
  EXPECT_EQ(still[0], 120);
  EXPECT_EQ(still[3], 4);
}

TEST(VcasTest, AccelerationTermIsLinear) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int k = 0; k < 100; ++k) {
    const std::array<double, 4> s = {u(rng), u(rng), u(rng), 5};
    const double a = u(rng), b = u(rng);
    auto term = [&s](double ao, double ai) {
      auto n = vcas_dynamics(s, ao, ai);
      return n[0] - s[0] + (s[1] - s[2]);
    };
    EXPECT_NEAR(term(2 * a, 2 * b), 2 * term(a, b), 1e-9);
  }
}

TEST(VcasTest, ObservationInputs) {
  EXPECT_EQ(VcasInput({50, -5, 5, 3}, 0), (RealVec{50, -5, 5, 3}));
  EXPECT_EQ(VcasInput({50, -5, 5, 3}, 1), (RealVec{-50, 5, -5, 3}));
}

TEST(VcasTest, InitialStateAndHorizon) {
  VcasParams p;
  p.t = 3;
  GameInstance v = build_vcas(p);
  EXPECT_EQ(v.initial.env, (RealVec{50, -5, 5, 3}));
  EXPECT_EQ(v.initial.agents[0].loc + 1, 4);
  EXPECT_EQ(v.initial.agents[1].loc + 1, 4);
  EXPECT_EQ(v.horizon, 3);
}

TEST(VcasTest, StubNetsHaveDocumentedShape) {
  auto nets = VcasStubNets(1);
  ASSERT_EQ(nets.size(), 9u);
  for (const auto& n : nets) {
    EXPECT_EQ(n.layers.size(), 8u);
    EXPECT_EQ(n.input_dim(), 4);
    EXPECT_EQ(n.output_dim(), 9);
    for (size_t l = 0; l + 1 < n.layers.size(); ++l) EXPECT_EQ(n.layers[l].out_dim(), 45);
  }
}

TEST(VcasTest, TrustAndFuelRewards) {
  VcasParams p;
  p.t = 2;
  GameInstance v = build_vcas(p);
  GameGraph g = unfold_regions(v.model, v.initial, v.horizon);
  double h_max = 0;
  for (const GameNode& n : g.nodes) h_max = std::max(h_max, std::abs(n.state.env[0]));
  // |h| = 50 <= 200 at the root, trust 4.
  const double expected = 50 / h_max + 1.0;
  EXPECT_NEAR(EvalStateReward(v.rewards[0], v.initial, {0, 2}), expected, 1e-12);

  GlobalState far = v.initial;
  far.env[0] = 300;
  ResolvedJoint idle_acc(2, nullptr);
  const Action zero{"0", {0.0}};
  ResolvedJoint zeros = {&zero, &zero};
  EXPECT_EQ(EvalStateReward(v.rewards[0], far, {0, 2}), 0);
  EXPECT_EQ(EvalActionReward(v.rewards[0], far, zeros, {0, 2}), 0);
  EXPECT_EQ(EvalActionReward(v.rewards[1], far, idle_acc, {0, 2}), 0);
}

TEST(VcasTest, InstantAltitudeRewards) {
  VcasParams p;
  p.reward = VcasRewardKind::kInstantAltitude;
  p.instant = 1;
  p.zero_sum = true;
  GameInstance v = build_vcas(p);
  EXPECT_EQ(EvalStateReward(v.rewards[0], v.initial, {1, 3}), 50);
  EXPECT_EQ(EvalStateReward(v.rewards[1], v.initial, {1, 3}), -50);
  EXPECT_EQ(EvalStateReward(v.rewards[0], v.initial, {2, 3}), 0);
}

TEST(VcasTest, ParameterChecks) {
  VcasParams p;
  p.eps_own = 1.5;
  EXPECT_THROW(build_vcas(p), Error);
  p = {};
  p.h = 5000;
  EXPECT_THROW(build_vcas(p), Error);
  p = {};
  p.nets = {RandomNet({4, 9}, 1)};
  EXPECT_THROW(build_vcas(p), Error);
}

TEST(VcasTest, EveryTrustDistributionSumsToOne) {
  VcasParams p;
  p.t = 2;
  p.eps_own = 0.1;
  p.eps_int = 0.25;
  GameInstance v = build_vcas(p);
  GameGraph g = unfold_regions(v.model, v.initial, v.horizon);
  for (const GameNode& n : g.nodes) {
    for (const auto& outs : n.outcomes) {
      double total = 0;
      for (const Outcome& o : outs) total += o.prob;
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

}  // namespace
}  // namespace nscsg
