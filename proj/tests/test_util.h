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

#ifndef NSCSG_TESTS_TEST_UTIL_H_
#define NSCSG_TESTS_TEST_UTIL_H_

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "nscsg/nscsg.hpp"

namespace nscsg {
namespace testing {

struct RandomGameOptions {
  int max_actions = 3;
  int max_locals = 3;
  double empty_prob = 0.1;   // chance an agent is idle in a local state
  double branch_prob = 0.3;  // chance a local transition has two outcomes
};

// Seeded random two-agent game. Local states and actions are small,
// availability depends on the local state, the environment is a single
// counter in {0..3} driven by the joint action, rewards are small integers.
inline GameInstance RandomGame(std::uint64_t seed, int horizon,
                               const RandomGameOptions& opts = {}) {
  std::mt19937_64 rng(seed);
  auto uniform_int = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  auto coin = [&rng](double p) { return std::bernoulli_distribution(p)(rng); };

  constexpr int kIdleSlot = 3;  // table index used for the idle action
  struct Tables {
    std::array<std::vector<std::vector<int>>, 2> avail;
    // trans[i][loc][a0 * 4 + a1] -> distribution over next local states
    std::array<std::vector<std::vector<std::vector<std::pair<int, double>>>>, 2> trans;
    double state_r[2][3][3][4];
    double action_r[2][3][3][4][4];
  };
  auto tab = std::make_shared<Tables>();
  std::vector<AgentSpec> agents(2);
  for (int i = 0; i < 2; ++i) {
    const int na = uniform_int(1, opts.max_actions);
    const int nl = uniform_int(1, opts.max_locals);
    AgentSpec& a = agents[i];
    a.name = "agent" + std::to_string(i);
    for (int l = 0; l < nl; ++l) a.local_states.push_back({double(l)});
    a.percepts = {{0.0}};
    for (int k = 0; k < na; ++k) a.actions.push_back({std::string(1, char('a' + k)), {}});
    tab->avail[i].resize(nl);
    tab->trans[i].resize(nl);
    for (int l = 0; l < nl; ++l) {
      std::vector<int> sub;
      for (int k = 0; k < na; ++k) {
        if (coin(0.6)) sub.push_back(k);
      }
      if (sub.empty() && !coin(opts.empty_prob)) sub.push_back(uniform_int(0, na - 1));
      tab->avail[i][l] = sub;
      tab->trans[i][l].resize(16);
      for (auto& dist : tab->trans[i][l]) {
        const int first = uniform_int(0, nl - 1);
        if (nl > 1 && coin(opts.branch_prob)) {
          int second = uniform_int(0, nl - 2);
          if (second >= first) ++second;
          const double q = uniform_int(1, 3) / 4.0;
          dist = {{first, q}, {second, 1.0 - q}};
        } else {
          dist = {{first, 1.0}};
        }
      }
    }
    a.availability = [tab, i](const LocalView& v) { return tab->avail[i][v.loc]; };
  }
  for (int i = 0; i < 2; ++i) {
    agents[i].local_transition = [tab, i](const LocalView& v, const ResolvedJoint& j) {
      auto index = [](const Action* a) {
        if (a == nullptr) return kIdleSlot;
        return static_cast<int>(a->label[0] - 'a');
      };
      return tab->trans[i][v.loc][index(j[0]) * 4 + index(j[1])];
    };
  }
  for (int i = 0; i < 2; ++i) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        for (int e = 0; e < 4; ++e) {
          tab->state_r[i][a][b][e] = uniform_int(-3, 3);
          for (int x = 0; x < 4; ++x) tab->action_r[i][a][b][e][x] = uniform_int(-2, 2);
        }
      }
    }
  }
  auto label_slot = [](const Action* a) {
    return a == nullptr ? kIdleSlot : static_cast<int>(a->label[0] - 'a');
  };
  GameInstance inst;
  inst.model = NsCsg(std::move(agents), 1, [label_slot](const RealVec& env, const ResolvedJoint& j) {
    const int e = static_cast<int>(env[0]);
    return RealVec{double((e * 5 + label_slot(j[0]) * 3 + label_slot(j[1]) + 2) % 4)};
  });
  inst.initial.agents = {AgentState{0, 0}, AgentState{0, 0}};
  inst.initial.env = {0.0};
  inst.horizon = horizon;
  for (int i = 0; i < 2; ++i) {
    RewardStructure r;
    r.state = [tab, i](const GlobalState& s, StageInfo) {
      return tab->state_r[i][s.agents[0].loc][s.agents[1].loc][int(s.env[0])];
    };
    r.action = [tab, i, label_slot](const GlobalState& s, const ResolvedJoint& j, StageInfo) {
      const int e = int(s.env[0]);
      // Mix both agents' moves into one index; idle contributes slot 3.
      return tab->action_r[i][s.agents[0].loc][s.agents[1].loc][e]
                          [(label_slot(j[0]) + 2 * label_slot(j[1])) % 4];
    };
    inst.rewards.push_back(std::move(r));
  }
  return inst;
}

// Two agents with two actions each whose local state moves to either of
// two values with probability 1/2 whatever is played: every history has
// |A_1||A_2||S_1||S_2| = 16 children. Rewards depend on the local states.
inline GameInstance FullBranchingGame(int horizon) {
  std::vector<AgentSpec> agents(2);
  for (int i = 0; i < 2; ++i) {
    AgentSpec& a = agents[i];
    a.local_states = {{0}, {1}};
    a.percepts = {{0}};
    a.actions = {{"x", {}}, {"y", {}}};
    a.local_transition = [](const LocalView&, const ResolvedJoint&) {
      return std::vector<std::pair<int, double>>{{0, 0.5}, {1, 0.5}};
    };
  }
  GameInstance inst;
  inst.model = NsCsg(std::move(agents), 0, nullptr);
  inst.initial.agents = {AgentState{0, 0}, AgentState{0, 0}};
  inst.horizon = horizon;
  for (int i = 0; i < 2; ++i) {
    RewardStructure r;
    r.state = [i](const GlobalState& s, StageInfo) {
      return double(s.agents[i].loc) - 0.5 * s.agents[1 - i].loc;
    };
    r.action = [i](const GlobalState&, const ResolvedJoint& j, StageInfo) {
      return j[0]->label == j[1]->label ? (i == 0 ? 1.0 : 0.5) : 0.0;
    };
    inst.rewards.push_back(std::move(r));
  }
  return inst;
}

struct Unfolded {
  GameInstance inst;
  GameGraph graph;
  RewardTable table;
};

inline Unfolded Prepare(GameInstance inst, bool tree = true) {
  Unfolded u{std::move(inst), {}, {}};
  u.graph = tree ? unfold_tree(u.inst.model, u.inst.initial, u.inst.horizon)
                 : unfold_regions(u.inst.model, u.inst.initial, u.inst.horizon);
  u.table = BuildRewardTable(u.inst.model, u.graph, u.inst.rewards);
  return u;
}

// Random game whose tree stays below `max_nodes`; the horizon shrinks
// until it fits.
inline Unfolded SmallRandomTree(std::uint64_t seed, int horizon, int max_nodes,
                                const RandomGameOptions& opts = {}) {
  for (int k = horizon; k >= 0; --k) {
    Unfolded u = Prepare(RandomGame(seed, k, opts));
    if (u.graph.size() <= max_nodes) return u;
  }
  return Prepare(RandomGame(seed, 0, opts));
}

inline RealVec Normalized(RealVec v) {
  double total = 0.0;
  for (double x : v) total += x;
  for (double& x : v) x /= total;
  return v;
}

// Random mixed behaviour at every non-leaf node.
inline EquilibriumSolution RandomProfile(const GameGraph& g, const RewardTable& t,
                                         EquilibriumType type, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  EquilibriumSolution sol;
  sol.type = type;
  sol.strategy.resize(g.size());
  for (int id = 0; id < g.size(); ++id) {
    const GameNode& n = g.nodes[id];
    if (n.is_leaf()) continue;
    NodeStrategy& s = sol.strategy[id];
    if (type == EquilibriumType::kNash) {
      for (int a = 0; a < n.num_actions(0); ++a) s.row.push_back(u(rng));
      for (int b = 0; b < n.num_actions(1); ++b) s.col.push_back(u(rng));
      s.row = Normalized(s.row);
      s.col = Normalized(s.col);
      s.joint = ProductDistribution(s.row, s.col);
    } else {
      for (int j = 0; j < n.num_joint(); ++j) s.joint.push_back(u(rng));
      s.joint = Normalized(s.joint);
    }
  }
  sol.value = evaluate_values(g, t, sol.strategy).value;
  return sol;
}

}  // namespace testing
}  // namespace nscsg

#endif  // NSCSG_TESTS_TEST_UTIL_H_
